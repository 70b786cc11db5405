#pragma once

// Denial-of-service schedules (with the duty-cycle budget they must respect)
// and actuation-attack signals (with their per-step variation bound).
// Convention: the flag psi(k) is 0 while communication is jammed and 1 when
// the network functions — the controllers multiply by psi, so 0 freezes them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dmfac/errors.hpp"
#include "dmfac/expr.hpp"

namespace dmfac {

// Attacked steps are the union of half-open intervals [t_on, t_off).
struct DoSSchedule {
  std::vector<std::pair<long, long>> intervals;  // sorted, disjoint
  long horizon = 0;

  long attacked_steps() const {
    long total = 0;
    for (const auto& [on, off] : intervals) total += off - on;
    return total;
  }
};

// Assumption: attacked steps in [0,k] never exceed M + beta*k.
struct DoSBudget {
  double M = 0.0;      // burst allowance, >= 0
  double beta = 0.0;   // duty-cycle rate, in (0,1)
};

struct AASignal {
  Expr expression;              // chi(k), a function of k only
  double variation_bound = 0.0; // d_bar, > 0
};

inline DoSSchedule make_schedule(std::vector<std::pair<long, long>> intervals,
                                 long horizon) {
  if (horizon < 0) throw ValidationError("schedule horizon must be >= 0");
  std::sort(intervals.begin(), intervals.end());
  long prev_off = 0;
  for (const auto& [on, off] : intervals) {
    if (on < 0 || !(on < off) || off > horizon)
      throw ValidationError("DoS interval must satisfy 0 <= on < off <= horizon");
    if (on < prev_off)
      throw ValidationError("DoS intervals must be disjoint");
    prev_off = off;
  }
  return DoSSchedule{std::move(intervals), horizon};
}

inline void validate_budget_params(const DoSBudget& b) {
  if (!(b.M >= 0.0)) throw ValidationError("DoS budget M must be >= 0");
  if (!(b.beta > 0.0 && b.beta < 1.0))
    throw ValidationError("DoS budget beta must lie in (0,1)");
}

inline int dos_flag(const DoSSchedule& s, long k) {
  if (k < 0 || k > s.horizon)
    throw ValidationError("dos_flag step outside [0, horizon]");
  for (const auto& [on, off] : s.intervals) {
    if (k < on) break;  // sorted: no later interval can contain k
    if (k < off) return 0;
  }
  return 1;
}

// Prefix check: Assumption 5 must hold at every k, not just at the horizon.
inline bool validate_budget(const DoSSchedule& s, const DoSBudget& b) {
  validate_budget_params(b);
  long count = 0;
  for (const auto& [on, off] : s.intervals) {
    for (long k = on; k < off; ++k) {
      ++count;  // count == attacked steps in [0,k]; budget only grows between bursts
      if (static_cast<double>(count) > b.M + b.beta * static_cast<double>(k))
        return false;
    }
  }
  return true;
}

struct GenOptions {
  double front_fraction = 0.5;  // bursts start within [1, front_fraction*K)
  double mean_length = 6.0;     // geometric mean burst length
  long target_mass = -1;        // total attacked steps to aim for; -1 = fill freely
};

// Random burst placement: geometric gaps and lengths, every burst trimmed to
// the largest prefix-feasible size, so the output always passes
// validate_budget. Deterministic for a fixed seed.
inline DoSSchedule generate_schedule(const DoSBudget& budget, long horizon,
                                     std::uint64_t seed,
                                     const GenOptions& opts = {}) {
  validate_budget_params(budget);
  if (horizon < 1) throw ValidationError("generate_schedule needs horizon >= 1");
  if (!(opts.front_fraction > 0.0 && opts.front_fraction <= 1.0))
    throw ValidationError("front_fraction must lie in (0,1]");
  if (!(opts.mean_length >= 1.0))
    throw ValidationError("mean_length must be >= 1");
  if (opts.target_mass > 0) {
    double cap = budget.M + budget.beta * static_cast<double>(horizon - 1);
    if (static_cast<double>(opts.target_mass) > cap)
      throw ValidationError("requested attack mass exceeds the DoS budget");
  }

  std::mt19937_64 rng(seed);
  // Geometric with mean m has success probability 1/m (support 1,2,...).
  std::geometric_distribution<long> gap_dist(1.0 / (opts.mean_length + 1.0));
  std::geometric_distribution<long> len_dist(1.0 / opts.mean_length);

  const long window_end = std::max<long>(
      2, static_cast<long>(std::floor(opts.front_fraction *
                                      static_cast<double>(horizon))));
  std::vector<std::pair<long, long>> intervals;
  long attacked = 0;
  long cursor = 1;
  while (cursor < window_end) {
    long start = cursor + 1 + gap_dist(rng);
    if (start >= window_end) break;
    long want = 1 + len_dist(rng);
    if (opts.target_mass > 0)
      want = std::min(want, opts.target_mass - attacked);
    // Largest j with attacked + j <= M + beta*(start + j - 1); floor is
    // conservative, and the explicit re-check below absorbs any rounding.
    double room = (budget.M + budget.beta * static_cast<double>(start - 1) -
                   static_cast<double>(attacked)) /
                  (1.0 - budget.beta);
    long feasible = room > 0.0 ? static_cast<long>(std::floor(room)) : 0;
    while (feasible > 0 &&
           static_cast<double>(attacked + feasible) >
               budget.M + budget.beta * static_cast<double>(start + feasible - 1))
      --feasible;
    long len = std::min({want, feasible, horizon - start});
    if (len < 1) {
      cursor = start + 1;  // budget not yet replenished; move on
      continue;
    }
    intervals.emplace_back(start, start + len);
    attacked += len;
    cursor = start + len;
    if (opts.target_mass > 0 && attacked >= opts.target_mass) break;
  }
  return make_schedule(std::move(intervals), horizon);
}

inline double aa_value(const AASignal& s, long k) {
  return s.expression.eval(0.0, 0.0, static_cast<double>(k));
}

// Assumption on attack growth: starts at zero, per-step increment strictly
// below d_bar (the increments may accumulate without bound).
inline bool validate_variation(const AASignal& s, long horizon) {
  if (aa_value(s, 0) != 0.0) return false;
  double prev = 0.0;
  for (long k = 1; k <= horizon; ++k) {
    double cur = aa_value(s, k);
    if (!(std::fabs(cur - prev) < s.variation_bound)) return false;
    prev = cur;
  }
  return true;
}

}  // namespace dmfac
