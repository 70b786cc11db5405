#pragma once

// Step-loop executor for the double-layer scheme. Per step k: the twin layer
// reads the leader and the DoS flag, updates its PPD estimate (clean steps
// only), forms the distributed local error, applies the switching law and
// advances the twin one step ahead; the cyber-physical layer then updates its
// own PPD estimate, estimates the attack increment, computes the compensated
// input using the twin's look-ahead output, and advances the true plant under
// input + attack. Everything is recorded per step.
//
// Both layers advance through the one-step data model
//   y(k+1) = y(k) + f(y(k), u(k)) - f(y(k), u(k-1)),
// i.e. the output moves by the control increment's effect at the current
// state. This realizes the hold property exactly: an unchanged input moves
// the output by literally zero, so a jammed twin stays bit-identical frozen.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dmfac/attacks.hpp"
#include "dmfac/cpl.hpp"
#include "dmfac/errors.hpp"
#include "dmfac/mfac.hpp"
#include "dmfac/plant.hpp"
#include "dmfac/topology.hpp"
#include "dmfac/twin_layer.hpp"

namespace dmfac {

// DoS source: a fixed interval list or the seeded generator.
struct DoSSpec {
  enum class Mode { kExplicit, kRandom } mode = Mode::kExplicit;
  std::vector<std::pair<long, long>> intervals;  // explicit mode
  DoSBudget budget;                              // random mode (and audits)
  bool has_budget = false;
  std::uint64_t seed = 0;
  GenOptions gen;
};

struct Scenario {
  CommGraph graph;
  LeaderModel leader;
  std::vector<AgentModel> tl_models;
  std::vector<AgentModel> cpl_models;
  std::vector<AASignal> aa;
  DoSSpec dos;
  MfacGains tl_gains;
  MfacGains cpl_gains;
  CompensatorParams comp;
  long horizon = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd initial_ytl;  // twin outputs at k=0
  Eigen::VectorXd initial_y;    // plant outputs at k=0
  Eigen::VectorXd initial_utl;  // twin inputs at k=0
  Eigen::VectorXd initial_u;    // commanded inputs at k=0
};

// Row k of every matrix holds the value at step k (state at k, controls
// computed at k). run() emits rows 0..K; the look-ahead outputs at K+1 are
// computed but not recorded.
struct SimTrace {
  int n = 0;
  Eigen::VectorXi psi;
  Eigen::VectorXd y0;
  Eigen::MatrixXd ytl, y;          // outputs, twin and plant
  Eigen::MatrixXd utl, u, ubar;    // twin input, commanded input, actuated input
  Eigen::MatrixXd chi, dchihat;    // attack signal and increment estimate
  Eigen::MatrixXd phi_tl, phi_cpl; // PPD estimates (CSV: PHI_i, phi_i)
  Eigen::MatrixXd etl, e, sigma;   // leader-twin, leader-plant, twin-plant errors
  Eigen::MatrixXd xi;              // distributed local errors

  long rows() const { return y0.size(); }

  // Last step with psi=0, or -1 if the run was attack-free.
  long last_attacked_step() const {
    for (long k = rows() - 1; k >= 0; --k)
      if (psi(k) == 0) return k;
    return -1;
  }
};

inline DoSSchedule resolve_schedule(const DoSSpec& spec, long horizon) {
  if (spec.mode == DoSSpec::Mode::kRandom) {
    if (!spec.has_budget)
      throw ValidationError("random DoS mode requires M and beta");
    return generate_schedule(spec.budget, horizon, spec.seed, spec.gen);
  }
  return make_schedule(spec.intervals, horizon);
}

namespace detail {

constexpr double kDivergenceGuard = 1e6;

inline void guard(const char* name, long k, double v) {
  if (!(std::fabs(v) <= kDivergenceGuard)) throw DivergenceError(name, k, v);
}

// One data-model plant step: move from y by the effect of u_now vs u_prev.
inline double advance(const AgentModel& m, double y, double u_now,
                      double u_prev) {
  return y + follower_step(m, y, u_now) - follower_step(m, y, u_prev);
}

}  // namespace detail

inline SimTrace run(const Scenario& sc) {
  const int n = sc.graph.n();
  const long K = sc.horizon;
  if (K < 1) throw ValidationError("scenario horizon must be >= 1");
  auto want_n = [n](long size, const char* what) {
    if (size != n)
      throw ValidationError(std::string(what) + " list length must equal n");
  };
  want_n(static_cast<long>(sc.tl_models.size()), "tl agent model");
  want_n(static_cast<long>(sc.cpl_models.size()), "cpl agent model");
  want_n(static_cast<long>(sc.aa.size()), "attack signal");
  want_n(sc.initial_ytl.size(), "initial twin output");
  want_n(sc.initial_y.size(), "initial plant output");
  want_n(sc.initial_utl.size(), "initial twin input");
  want_n(sc.initial_u.size(), "initial commanded input");
  validate(sc.tl_gains);
  validate(sc.cpl_gains);
  if (sc.comp.enabled) {
    // gamma_r = 0 is the degenerate "estimator off" point (identically zero
    // attack estimates); scenario files enforce the strict bound at parse.
    if (!(sc.comp.d_bar > 0.0)) throw ValidationError("d_bar must be > 0");
    if (!(sc.comp.gamma_r >= 0.0 && sc.comp.gamma_r < sc.cpl_gains.gamma))
      throw ValidationError("gamma_r must satisfy 0 <= gamma_r < gamma_c");
  }

  const DoSSchedule schedule = resolve_schedule(sc.dos, K);
  const LaplacianPair lap = laplacian(sc.graph);

  SimTrace t;
  t.n = n;
  t.psi.resize(K + 1);
  t.y0.resize(K + 1);
  for (Eigen::MatrixXd* m : {&t.ytl, &t.y, &t.utl, &t.u, &t.ubar, &t.chi,
                             &t.dchihat, &t.phi_tl, &t.phi_cpl, &t.etl, &t.e,
                             &t.sigma, &t.xi})
    m->resize(K + 1, n);

  std::vector<TLState> tls(static_cast<std::size_t>(n));
  std::vector<CPLState> cpls(static_cast<std::size_t>(n));
  Eigen::VectorXd cur_ytl = sc.initial_ytl;
  Eigen::VectorXd cur_y = sc.initial_y;
  Eigen::VectorXd ubar_prev(n);
  for (int i = 0; i < n; ++i) {
    auto si = static_cast<std::size_t>(i);
    tls[si].phi_hat = sc.tl_gains.phi0;
    tls[si].u_prev = sc.initial_utl(i);
    tls[si].y_prev = cur_ytl(i);
    cpls[si].phi_hat = sc.cpl_gains.phi0;
    cpls[si].u_prev = sc.initial_u(i);
    cpls[si].y_prev = cur_y(i);
    ubar_prev(i) = sc.initial_u(i) + aa_value(sc.aa[si], 0);
  }

  // Row 0: the Initialize block. The twin look-ahead from a rest input is the
  // identity (zero increment), so step 1 starts from the initial outputs.
  {
    double y0_0 = leader_output(sc.leader, 0);
    t.psi(0) = dos_flag(schedule, 0);
    t.y0(0) = y0_0;
    Eigen::VectorXd xi0 = tl_local_error(lap, cur_ytl, y0_0);
    for (int i = 0; i < n; ++i) {
      auto si = static_cast<std::size_t>(i);
      t.ytl(0, i) = cur_ytl(i);
      t.y(0, i) = cur_y(i);
      t.utl(0, i) = sc.initial_utl(i);
      t.u(0, i) = sc.initial_u(i);
      t.chi(0, i) = aa_value(sc.aa[si], 0);
      t.ubar(0, i) = ubar_prev(i);
      t.dchihat(0, i) = 0.0;
      t.phi_tl(0, i) = sc.tl_gains.phi0;
      t.phi_cpl(0, i) = sc.cpl_gains.phi0;
      t.etl(0, i) = y0_0 - cur_ytl(i);
      t.e(0, i) = y0_0 - cur_y(i);
      t.sigma(0, i) = sigma(cur_ytl(i), cur_y(i));
      t.xi(0, i) = xi0(i);
    }
  }

  try {
    for (long k = 1; k <= K; ++k) {
      const int psi_k = dos_flag(schedule, k);
      const double y0_k = leader_output(sc.leader, k);
      t.psi(k) = psi_k;
      t.y0(k) = y0_k;

      // Twin layer: estimate (clean steps only), local error, switching law,
      // one-step look-ahead. Jammed steps freeze input and output exactly.
      const Eigen::VectorXd xi_k = tl_local_error(lap, cur_ytl, y0_k);
      Eigen::VectorXd next_ytl(n);
      for (int i = 0; i < n; ++i) {
        auto si = static_cast<std::size_t>(i);
        TLState& ts = tls[si];
        if (psi_k == 1)
          tl_update_ppd(ts, sc.tl_gains, cur_ytl(i) - ts.y_prev);
        double utl_old = ts.u_prev;
        double utl_k = tl_control(ts, sc.tl_gains, psi_k, xi_k(i));
        next_ytl(i) =
            psi_k == 0
                ? cur_ytl(i)
                : detail::advance(sc.tl_models[si], cur_ytl(i), utl_k, utl_old);
        detail::guard("utl", k, utl_k);
        detail::guard("ytl", k, next_ytl(i));
        t.phi_tl(k, i) = ts.phi_hat;
        t.utl(k, i) = utl_k;
        t.xi(k, i) = xi_k(i);
      }

      // Cyber-physical layer: estimate against the actuated increment, then
      // the attack-increment estimate from sigma(k), then the compensated law
      // using the twin's look-ahead, then the true plant under u + chi.
      for (int i = 0; i < n; ++i) {
        auto si = static_cast<std::size_t>(i);
        CPLState& cs = cpls[si];
        cpl_update_ppd(cs, sc.cpl_gains, cur_y(i) - cs.y_prev);
        double sig_k = sigma(cur_ytl(i), cur_y(i));
        double dchi_k = sc.comp.enabled
                            ? aa_estimate(cs.dchi_hat_prev, cs.phi_hat, sc.comp,
                                          sc.cpl_gains.lambda, sig_k, k)
                            : 0.0;
        double u_k = cpl_control(cs, sc.cpl_gains, next_ytl(i), cur_y(i), dchi_k);
        double chi_k = aa_value(sc.aa[si], k);
        double ubar_k = u_k + chi_k;
        double next_y =
            detail::advance(sc.cpl_models[si], cur_y(i), ubar_k, ubar_prev(i));
        detail::guard("u", k, u_k);
        detail::guard("ubar", k, ubar_k);
        detail::guard("y", k, next_y);

        t.phi_cpl(k, i) = cs.phi_hat;
        t.sigma(k, i) = sig_k;
        t.dchihat(k, i) = dchi_k;
        t.u(k, i) = u_k;
        t.chi(k, i) = chi_k;
        t.ubar(k, i) = ubar_k;
        t.ytl(k, i) = cur_ytl(i);
        t.y(k, i) = cur_y(i);
        t.etl(k, i) = y0_k - cur_ytl(i);
        t.e(k, i) = y0_k - cur_y(i);

        cs.y_prev = cur_y(i);
        cur_y(i) = next_y;
        ubar_prev(i) = ubar_k;
      }
      for (int i = 0; i < n; ++i) {
        tls[static_cast<std::size_t>(i)].y_prev = cur_ytl(i);
        cur_ytl(i) = next_ytl(i);
      }
    }
  } catch (const DivergenceError&) {
    throw;
  } catch (const ExprError& ex) {
    // A non-finite plant/leader evaluation mid-run is a diverged simulation,
    // not a malformed scenario.
    throw DivergenceError(std::string("expression (") + ex.what() + ")", -1,
                          std::numeric_limits<double>::infinity());
  }
  return t;
}

// CSV layout: `k,psi,y0` then 13 columns per agent; decimal values carry 17
// significant digits so a re-parse reproduces every double bit-for-bit.
inline void export_csv(const SimTrace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: LF on every platform
  if (!out) throw ValidationError("cannot open for writing: " + path);

  out << "k,psi,y0";
  static constexpr const char* kAgentCols[] = {
      "ytl", "y", "utl", "u", "ubar", "chi", "dchihat",
      "PHI", "phi", "etl", "e", "sigma", "xi"};
  for (int i = 1; i <= t.n; ++i)
    for (const char* col : kAgentCols) out << ',' << col << '_' << i;
  out << '\n';

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (long k = 0; k < t.rows(); ++k) {
    out << k << ',' << t.psi(k);
    std::snprintf(buf, sizeof buf, "%.17g", t.y0(k));
    out << ',' << buf;
    for (int i = 0; i < t.n; ++i) {
      put(t.ytl(k, i));
      put(t.y(k, i));
      put(t.utl(k, i));
      put(t.u(k, i));
      put(t.ubar(k, i));
      put(t.chi(k, i));
      put(t.dchihat(k, i));
      put(t.phi_tl(k, i));
      put(t.phi_cpl(k, i));
      put(t.etl(k, i));
      put(t.e(k, i));
      put(t.sigma(k, i));
      put(t.xi(k, i));
    }
    out << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace dmfac
