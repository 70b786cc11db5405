#pragma once

// Command implementations behind the command-line tool. Kept as plain
// functions over paths so they are directly callable from tests; argv
// handling lives in the tool's main().
//
// Exit codes: 0 ok, 1 condition failure (check only), 2 validation error,
// 3 diverged simulation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dmfac/analysis.hpp"
#include "dmfac/engine.hpp"
#include "dmfac/errors.hpp"
#include "dmfac/scenario.hpp"

namespace dmfac {

namespace detail {

inline void write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw ValidationError("write failed: " + path.string());
}

inline ConditionReport conditions_for(const LoadedScenario& ls) {
  return check_conditions(ls.analysis.b_t, ls.analysis.b_c,
                          ls.scenario.tl_gains, ls.scenario.cpl_gains,
                          ls.scenario.graph, ls.analysis.alpha1,
                          ls.analysis.alpha2, ls.scenario.dos.budget.beta);
}

// k, etl_max, e_max, psi — space-separated columns for external plotting.
inline std::string plot_errors_text(const SimTrace& t) {
  std::string s = "# k etl_max e_max psi\n";
  char buf[96];
  for (long k = 0; k < t.rows(); ++k) {
    std::snprintf(buf, sizeof buf, "%ld %.17g %.17g %d\n", k,
                  t.etl.row(k).cwiseAbs().maxCoeff(),
                  t.e.row(k).cwiseAbs().maxCoeff(), t.psi(k));
    s += buf;
  }
  return s;
}

// Modeling-assumption audit: the schedule must fit the duty-cycle budget and
// every attack signal must respect the variation bound. Violations don't
// stop a run; they flag it.
inline bool assumptions_hold(const Scenario& sc) {
  DoSSchedule schedule = resolve_schedule(sc.dos, sc.horizon);
  if (!validate_budget(schedule, sc.dos.budget)) return false;
  for (const AASignal& sig : sc.aa)
    if (!validate_variation(sig, sc.horizon)) return false;
  return true;
}

}  // namespace detail

inline int cmd_run(const std::string& scenario_path,
                   const std::string& out_dir) {
  LoadedScenario ls;
  try {
    ls = load_scenario_file(scenario_path);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  SimTrace trace;
  try {
    trace = run(ls.scenario);
  } catch (const DivergenceError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  try {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    ConditionReport cond = detail::conditions_for(ls);
    BoundReport bounds = make_bound_report(
        trace, ls.scenario.dos.budget.M, ls.scenario.dos.budget.beta,
        ls.analysis.b_c, ls.scenario.comp.d_bar, ls.analysis.alpha1,
        ls.analysis.alpha2, ls.transient_cut);

    export_csv(trace, (dir / "trace.csv").string());
    detail::write_text(dir / "conditions.txt", to_text(cond));
    detail::write_text(dir / "bounds.txt", to_text(bounds));
    detail::write_text(dir / "plot_errors.dat", detail::plot_errors_text(trace));

    std::cout << to_text(cond) << to_text(bounds);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}

inline int cmd_check(const std::string& scenario_path) {
  try {
    LoadedScenario ls = load_scenario_file(scenario_path);
    ConditionReport cond = detail::conditions_for(ls);
    std::cout << to_text(cond);
    bool all = cond.tl_gain_pass && cond.beta_pass && cond.cpl_gain_pass;
    return all ? 0 : 1;
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}

inline int cmd_sweep(const std::string& scenario_path, const std::string& param,
                     double from, double to, long steps,
                     const std::string& out_dir) {
  LoadedScenario base;
  try {
    if (param != "beta" && param != "M" && param != "d_bar")
      throw ValidationError("sweep param must be one of beta, M, d_bar");
    if (steps < 1) throw ValidationError("sweep needs at least 1 step");
    base = load_scenario_file(scenario_path);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  std::string csv = "value,valid,conditions_pass,bt_observed,b_observed,diverged\n";
  for (long s = 0; s < steps; ++s) {
    double value = steps == 1 ? from
                              : from + (to - from) * static_cast<double>(s) /
                                           static_cast<double>(steps - 1);
    LoadedScenario point = base;
    if (param == "beta") point.scenario.dos.budget.beta = value;
    else if (param == "M") point.scenario.dos.budget.M = value;
    else {
      point.scenario.comp.d_bar = value;
      for (AASignal& sig : point.scenario.aa) sig.variation_bound = value;
    }

    bool valid = false, conditions_pass = false, diverged = false;
    double bt = std::nan(""), b = std::nan("");
    try {
      valid = detail::assumptions_hold(point.scenario);
    } catch (const ValidationError&) {
      valid = false;  // e.g. swept beta outside (0,1)
    }
    try {
      ConditionReport cond = detail::conditions_for(point);
      conditions_pass =
          cond.tl_gain_pass && cond.beta_pass && cond.cpl_gain_pass;
    } catch (const ValidationError&) {
      conditions_pass = false;
    }
    try {
      SimTrace trace = run(point.scenario);
      long cut = point.transient_cut >= 0 ? point.transient_cut
                                          : derive_transient_cut(trace);
      std::tie(bt, b) = measure_uub(trace, cut);
    } catch (const DivergenceError&) {
      diverged = true;
    } catch (const ValidationError&) {
      valid = false;  // point not simulable (e.g. swept budget out of range)
    }

    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g,%d\n", value,
                  valid ? 1 : 0, conditions_pass ? 1 : 0, bt, b,
                  diverged ? 1 : 0);
    csv += buf;
  }

  try {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "sweep.csv", csv);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  std::cout << csv;
  return 0;
}

}  // namespace dmfac
