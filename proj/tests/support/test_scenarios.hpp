#pragma once

// Randomized-but-stable closed-loop scenarios for property tests: directed
// ring topologies (worst row gain 2), linear plants with positive input
// gains, a slow sinusoid leader, ramp actuation attacks and generated DoS
// schedules. Every draw satisfies the standing assumptions with margin, so
// the runs stay bounded and never trip the divergence guard.

#include <cstdio>
#include <random>
#include <string>

#include "dmfac/engine.hpp"

namespace testsup {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline dmfac::Scenario random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(2, 5);
  std::uniform_real_distribution<double> b_dist(0.5, 1.2);
  std::uniform_real_distribution<double> c_dist(-0.02, 0.02);
  std::uniform_real_distribution<double> y_dist(-0.5, 0.5);
  std::uniform_real_distribution<double> amp_dist(0.3, 1.0);
  std::uniform_real_distribution<double> m_dist(3.0, 10.0);
  std::uniform_real_distribution<double> beta_dist(0.1, 0.4);

  const int n = n_dist(rng);
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i) adj(i, (i + n - 1) % n) = 1;  // i hears i-1
  Eigen::VectorXi pins = Eigen::VectorXi::Zero(n);
  pins(0) = 1;

  dmfac::Scenario sc;
  sc.graph = dmfac::make_graph(adj, pins);
  sc.leader.trajectory =
      dmfac::parse_expr(num(amp_dist(rng)) + "*sin(pi*k/100)");
  sc.horizon = 120;
  sc.seed = seed;

  sc.tl_gains.gamma = 0.6;
  sc.cpl_gains.gamma = 0.8;
  sc.comp.enabled = true;
  sc.comp.gamma_r = 0.6 * sc.cpl_gains.gamma;
  sc.comp.d_bar = 0.03;

  sc.dos.mode = dmfac::DoSSpec::Mode::kRandom;
  sc.dos.budget = dmfac::DoSBudget{m_dist(rng), beta_dist(rng)};
  sc.dos.has_budget = true;
  sc.dos.seed = seed * 2654435761ull + 1;

  sc.initial_ytl.resize(n);
  sc.initial_y.resize(n);
  sc.initial_utl = Eigen::VectorXd::Zero(n);
  sc.initial_u = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    sc.tl_models.push_back(
        dmfac::AgentModel{dmfac::parse_expr("y + " + num(b_dist(rng)) + "*u"),
                          dmfac::AgentRole::kTlFollower});
    sc.cpl_models.push_back(
        dmfac::AgentModel{dmfac::parse_expr("y + " + num(b_dist(rng)) + "*u"),
                          dmfac::AgentRole::kCplFollower});
    sc.aa.push_back(dmfac::AASignal{dmfac::parse_expr(num(c_dist(rng)) + "*k"),
                                    sc.comp.d_bar});
    sc.initial_ytl(i) = y_dist(rng);
    sc.initial_y(i) = y_dist(rng);
  }
  return sc;
}

}  // namespace testsup
