#pragma once

// Agent dynamics and leader trajectory, both given as expressions. Followers
// are SISO maps y(k+1) = f(y(k), u(k)) evaluated one step at a time; the
// leader is an explicit function of the step index.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dmfac/errors.hpp"
#include "dmfac/expr.hpp"

namespace dmfac {

enum class AgentRole { kCplFollower, kTlFollower };

struct AgentModel {
  Expr dynamics;  // f(y, u); the variable k is not bound for followers
  AgentRole role = AgentRole::kCplFollower;
};

struct LeaderModel {
  Expr trajectory;  // y0(k); y and u are not bound for the leader
};

inline double follower_step(const AgentModel& m, double y, double u) {
  return m.dynamics.eval(y, u, 0.0);
}

inline double leader_output(const LeaderModel& m, long k) {
  return m.trajectory.eval(0.0, 0.0, static_cast<double>(k));
}

// Max one-step leader move Omega = max_k |y0(k+1) - y0(k)|, by exhaustive
// scan over the horizon; the residual-bound formulas take this as input.
inline double leader_variation(const LeaderModel& m, long horizon) {
  if (horizon < 1) throw ValidationError("leader_variation needs horizon >= 1");
  double omega = 0.0;
  double prev = leader_output(m, 0);
  for (long k = 1; k <= horizon; ++k) {
    double cur = leader_output(m, k);
    omega = std::max(omega, std::fabs(cur - prev));
    prev = cur;
  }
  return omega;
}

struct Interval {
  double lo;
  double hi;
};

// Empirical pseudo-partial-derivative audit: the largest control secant
// |f(y,ub) - f(y,ua)| / |ub - ua| over a uniform grid, plus whether every
// secant is strictly positive (the sign assumption the controllers rely on).
// This is a grid estimate, not a sup; for a linear a*y + b*u it is exactly |b|.
struct PpdAudit {
  double bound = 0.0;
  bool sign_positive = true;
};

inline PpdAudit audit_ppd_bound(const AgentModel& m,
                                Interval y_range = {-2.0, 2.0},
                                Interval u_range = {-2.0, 2.0},
                                int points = 9) {
  if (points < 2) throw ValidationError("audit grid needs at least 2 points");
  if (!(y_range.lo < y_range.hi) || !(u_range.lo < u_range.hi))
    throw ValidationError("audit ranges must be non-empty intervals");

  auto grid = [points](Interval r) {
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
      g[static_cast<std::size_t>(i)] =
          r.lo + (r.hi - r.lo) * static_cast<double>(i) /
                     static_cast<double>(points - 1);
    return g;
  };
  const std::vector<double> ys = grid(y_range);
  const std::vector<double> us = grid(u_range);

  PpdAudit audit;
  std::vector<double> fy(us.size());
  for (double y : ys) {
    for (std::size_t a = 0; a < us.size(); ++a)
      fy[a] = follower_step(m, y, us[a]);
    for (std::size_t a = 0; a < us.size(); ++a) {
      for (std::size_t b = a + 1; b < us.size(); ++b) {
        double secant = (fy[b] - fy[a]) / (us[b] - us[a]);
        if (secant <= 0.0) audit.sign_positive = false;
        audit.bound = std::max(audit.bound, std::fabs(secant));
      }
    }
  }
  return audit;
}

}  // namespace dmfac
