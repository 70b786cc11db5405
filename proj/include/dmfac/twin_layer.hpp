#pragma once

// Twin-layer (digital) controller for one agent: PPD estimation on the twin
// model, the distributed local error against neighbours and leader, and the
// DoS-aware switching law — the flag psi multiplies the update, so psi=0
// freezes the input exactly.

#include <Eigen/Dense>

#include "dmfac/errors.hpp"
#include "dmfac/mfac.hpp"
#include "dmfac/topology.hpp"

namespace dmfac {

struct TLState {
  double phi_hat = 1.0;  // current PPD estimate
  double u_prev = 0.0;   // twin input at k-1
  double du_prev = 0.0;  // twin input increment at k-1
  double y_prev = 0.0;   // twin output at k-1 (engine-maintained)
};

// Estimator step with dy = twin output increment at k. The caller must invoke
// this before tl_control (which overwrites du_prev), and must skip it on DoS
// steps — no fresh information flows while jammed.
inline double tl_update_ppd(TLState& s, const MfacGains& gains, double dy) {
  s.phi_hat = ppd_update(s.phi_hat, gains, s.du_prev, dy);
  return s.phi_hat;
}

// xi = (L + C) * E with e_i = y0 - ytl_i: each agent's neighbourhood
// disagreement plus its pinned leader error.
inline Eigen::VectorXd tl_local_error(const LaplacianPair& lap,
                                      const Eigen::VectorXd& y_tilde,
                                      double y0) {
  if (y_tilde.size() != lap.laplacian.rows())
    throw ValidationError("tl_local_error: vector length != graph size");
  Eigen::VectorXd errors =
      Eigen::VectorXd::Constant(y_tilde.size(), y0) - y_tilde;
  return (lap.laplacian + lap.pin_matrix) * errors;
}

// Switching law: u(k) = u(k-1) + psi * gain(phi_hat) * xi. The psi=0 branch
// copies u_prev without arithmetic so held steps are bit-exact.
inline double tl_control(TLState& s, const MfacGains& gains, int psi,
                         double xi) {
  if (psi == 0) {
    s.du_prev = 0.0;
    return s.u_prev;
  }
  double u = s.u_prev + control_gain(gains, s.phi_hat) * xi;
  s.du_prev = u - s.u_prev;
  s.u_prev = u;
  return u;
}

}  // namespace dmfac
