#pragma once

// Cyber-physical-layer controller for one agent: PPD estimation on the
// attacked plant (with the compensated regressor), the saturating estimator
// for the actuation-attack increment, and the compensated tracking law that
// steers the plant toward its twin.

#include <cmath>

#include "dmfac/errors.hpp"
#include "dmfac/mfac.hpp"

namespace dmfac {

struct CPLState {
  double phi_hat = 1.0;        // current PPD estimate
  double u_prev = 0.0;         // commanded input at k-1 (pre-attack)
  double du_prev = 0.0;        // commanded input increment at k-1
  double dchi_hat_prev = 0.0;  // attack-increment estimate at k-1
  double y_prev = 0.0;         // plant output at k-1 (engine-maintained)
};

struct CompensatorParams {
  double gamma_r = 0.0;  // scale-factor coefficient, 0 < gamma_r < gamma_c
  double d_bar = 0.0;    // attack variation bound
  bool enabled = true;   // false runs the plain (uncompensated) law
};

inline void validate(const CompensatorParams& p, double gamma_c) {
  if (!(p.d_bar > 0.0)) throw ValidationError("d_bar must be > 0");
  if (!(p.gamma_r > 0.0 && p.gamma_r < gamma_c))
    throw ValidationError("gamma_r must satisfy 0 < gamma_r < gamma_c");
}

// Layer disagreement sigma = ytl - y; the attack-estimation error signal.
inline double sigma(double y_tilde_i, double y_i) { return y_tilde_i - y_i; }

// Attack-increment estimator: x = prev - r*sigma with the adaptive scale
// r = gamma_r*phi/(lambda_c+phi^2), saturated to d_bar*x/(d_bar+|x|). The
// saturation keeps |result| < d_bar for any finite x, matching the bound the
// real increment is assumed to obey.
inline double aa_estimate(double prev, double phi_hat,
                          const CompensatorParams& params, double lambda_c,
                          double sigma_k, long k) {
  if (k == 0) return 0.0;
  double r = params.gamma_r * phi_hat / (lambda_c + phi_hat * phi_hat);
  double x = prev - r * sigma_k;
  return params.d_bar * x / (params.d_bar + std::fabs(x));
}

// Estimator step with dy = plant output increment at k. The regressor is the
// *actuated* increment estimate du(k-1) + dchi_hat(k-1), since the plant
// moved under u + chi, not u. Must run before cpl_control on the same step.
inline double cpl_update_ppd(CPLState& s, const MfacGains& gains, double dy) {
  s.phi_hat = ppd_update(s.phi_hat, gains, s.du_prev + s.dchi_hat_prev, dy);
  return s.phi_hat;
}

// Compensated law: u(k) = u(k-1) + gain*(ytl(k+1) - y(k)) - dchi_hat(k).
// The twin's next output is available at step k because the TL runs first.
// Advances u_prev/du_prev/dchi_hat_prev; the engine advances y_prev.
inline double cpl_control(CPLState& s, const MfacGains& gains,
                          double y_tilde_next, double y_k, double dchi_hat_k) {
  double u = s.u_prev + control_gain(gains, s.phi_hat) * (y_tilde_next - y_k) -
             dchi_hat_k;
  s.du_prev = u - s.u_prev;
  s.u_prev = u;
  s.dchi_hat_prev = dchi_hat_k;
  return u;
}

}  // namespace dmfac
