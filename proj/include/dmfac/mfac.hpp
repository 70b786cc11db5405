#pragma once

// Shared model-free adaptive control machinery: the gain set used by both
// layers, the projection-style PPD estimator update with its reset rule, and
// the control gain whose AM-GM cap drives the stability conditions.

#include <cmath>

#include "dmfac/errors.hpp"

namespace dmfac {

struct MfacGains {
  double eta = 1.0;       // estimator step coefficient, in (0,1]
  double mu = 1.0;        // estimator penalty, > 0
  double gamma = 0.5;     // controller step coefficient, in (0,1)
  double lambda = 1.0;    // controller penalty, > 0
  double epsilon = 1e-5;  // PPD reset floor, 0 < epsilon < phi0
  double phi0 = 1.0;      // initial (and reset) PPD estimate
};

inline void validate(const MfacGains& g) {
  if (!(g.eta > 0.0 && g.eta <= 1.0))
    throw ValidationError("eta must lie in (0,1]");
  if (!(g.mu > 0.0)) throw ValidationError("mu must be > 0");
  if (!(g.gamma > 0.0 && g.gamma < 1.0))
    throw ValidationError("gamma must lie in (0,1)");
  if (!(g.lambda > 0.0)) throw ValidationError("lambda must be > 0");
  if (!(g.epsilon > 0.0 && g.epsilon < g.phi0))
    throw ValidationError("epsilon must satisfy 0 < epsilon < phi0");
}

// One estimator step: candidate = prev + eta*g/(mu+g^2)*(dy - prev*g), then
// reset to phi0 if the candidate's magnitude drops below epsilon or its sign
// departs from sign(phi0). The reset is what keeps the control gain bounded
// away from zero and the PPD sign constant.
inline double ppd_update(double phi_prev, const MfacGains& gains,
                         double regressor, double dy) {
  double cand = phi_prev + gains.eta * regressor /
                               (gains.mu + regressor * regressor) *
                               (dy - phi_prev * regressor);
  bool flipped = (gains.phi0 > 0.0) ? (cand <= 0.0) : (cand >= 0.0);
  if (std::fabs(cand) < gains.epsilon || flipped) return gains.phi0;
  return cand;
}

// gamma*phi/(lambda+phi^2); for phi > 0 this never exceeds gamma/(2*sqrt(lambda)).
inline double control_gain(const MfacGains& g, double phi_hat) {
  return g.gamma * phi_hat / (g.lambda + phi_hat * phi_hat);
}

}  // namespace dmfac
