#pragma once

// Scenario file loader. The format is a small INI dialect: `[section]`
// headers, `key = value` lines, `#` comments. The [agent] section repeats,
// once per follower, in agent order. Expressions run to end of line.
//
//   [graph]    adjacency (rows split by ';'), pins
//   [leader]   expression
//   [agent]    cpl, tl, aa_signal, ytl_init, y_init, utl_init, u_init
//   [tl]       eta, mu, gamma, lambda, epsilon, phi0
//   [cpl]      same gains + gamma_r, d_bar, comp (on|off)
//   [dos]      mode (explicit|random), intervals (a:b ...), M, beta, seed,
//              front_fraction, mean_length
//   [run]      horizon, seed, transient_cut
//   [analysis] b_t, b_c, alpha1, alpha2   (condition-check inputs)

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dmfac/engine.hpp"
#include "dmfac/errors.hpp"

namespace dmfac {

// Audited input-gain bounds and fallback convergence rates used by the
// condition checks and analytic bounds; not consumed by any controller.
struct AnalysisParams {
  double b_t = 1.5;
  double b_c = 1.5;
  double alpha1 = 0.9;
  double alpha2 = 1.05;
};

struct LoadedScenario {
  Scenario scenario;
  AnalysisParams analysis;
  long transient_cut = -1;  // -1: derive from the trace (last attack + 50)
};

namespace detail {

struct AgentSpec {
  std::optional<std::string> cpl, tl, aa;
  std::optional<double> ytl_init, y_init, utl_init, u_init;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& where) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ValidationError("expected a number for " + where + ", got '" + v + "'");
  return d;
}

inline long parse_long(const std::string& v, const std::string& where) {
  char* end = nullptr;
  long l = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ValidationError("expected an integer for " + where + ", got '" + v + "'");
  return l;
}

inline bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ValidationError("expected on/off for " + where + ", got '" + v + "'");
}

}  // namespace detail

inline LoadedScenario parse_scenario(std::istream& in) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_long;
  using detail::trim;

  std::string section;
  std::vector<detail::AgentSpec> agents;
  std::optional<std::string> adjacency_text, pins_text, leader_text;
  std::optional<long> graph_n;
  MfacGains tl_gains, cpl_gains;
  CompensatorParams comp;
  bool comp_set_gamma_r = false, comp_set_d_bar = false;
  DoSSpec dos;
  bool dos_seen = false, dos_m_set = false, dos_beta_set = false;
  std::optional<std::uint64_t> dos_seed;
  std::optional<long> horizon, transient_cut;
  std::uint64_t run_seed = 0;
  AnalysisParams analysis;

  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto where = [&](const std::string& key) {
      return "[" + section + "] " + key + " (line " + std::to_string(lineno) + ")";
    };
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("malformed section header at line " +
                              std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section == "agent") agents.emplace_back();
      else if (section != "graph" && section != "leader" && section != "tl" &&
               section != "cpl" && section != "dos" && section != "run" &&
               section != "analysis")
        throw ValidationError("unknown section [" + section + "] at line " +
                              std::to_string(lineno));
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("expected key = value at line " +
                            std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("empty key or value at line " +
                            std::to_string(lineno));

    if (section == "graph") {
      if (key == "adjacency") adjacency_text = value;
      else if (key == "pins") pins_text = value;
      else if (key == "n") graph_n = parse_long(value, where(key));
      else throw ValidationError("unknown key " + where(key));
    } else if (section == "leader") {
      if (key == "expression") leader_text = value;
      else throw ValidationError("unknown key " + where(key));
    } else if (section == "agent") {
      detail::AgentSpec& a = agents.back();
      if (key == "cpl") a.cpl = value;
      else if (key == "tl") a.tl = value;
      else if (key == "aa_signal") a.aa = value;
      else if (key == "ytl_init") a.ytl_init = parse_double(value, where(key));
      else if (key == "y_init") a.y_init = parse_double(value, where(key));
      else if (key == "utl_init") a.utl_init = parse_double(value, where(key));
      else if (key == "u_init") a.u_init = parse_double(value, where(key));
      else throw ValidationError("unknown key " + where(key));
    } else if (section == "tl" || section == "cpl") {
      MfacGains& g = section == "tl" ? tl_gains : cpl_gains;
      if (key == "eta") g.eta = parse_double(value, where(key));
      else if (key == "mu") g.mu = parse_double(value, where(key));
      else if (key == "gamma") g.gamma = parse_double(value, where(key));
      else if (key == "lambda") g.lambda = parse_double(value, where(key));
      else if (key == "epsilon") g.epsilon = parse_double(value, where(key));
      else if (key == "phi0") g.phi0 = parse_double(value, where(key));
      else if (section == "cpl" && key == "gamma_r") {
        comp.gamma_r = parse_double(value, where(key));
        comp_set_gamma_r = true;
      } else if (section == "cpl" && key == "d_bar") {
        comp.d_bar = parse_double(value, where(key));
        comp_set_d_bar = true;
      } else if (section == "cpl" && key == "comp") {
        comp.enabled = parse_bool(value, where(key));
      } else throw ValidationError("unknown key " + where(key));
    } else if (section == "dos") {
      dos_seen = true;
      if (key == "mode") {
        if (value == "explicit") dos.mode = DoSSpec::Mode::kExplicit;
        else if (value == "random") dos.mode = DoSSpec::Mode::kRandom;
        else throw ValidationError("dos.mode must be explicit or random");
      } else if (key == "intervals") {
        std::istringstream iss(value);
        std::string tok;
        while (iss >> tok) {
          std::size_t colon = tok.find(':');
          if (colon == std::string::npos)
            throw ValidationError("interval must be on:off, got '" + tok + "'");
          dos.intervals.emplace_back(
              parse_long(tok.substr(0, colon), where(key)),
              parse_long(tok.substr(colon + 1), where(key)));
        }
      } else if (key == "M") {
        dos.budget.M = parse_double(value, where(key));
        dos_m_set = true;
      } else if (key == "beta") {
        dos.budget.beta = parse_double(value, where(key));
        dos_beta_set = true;
      } else if (key == "seed") {
        dos_seed = static_cast<std::uint64_t>(parse_long(value, where(key)));
      } else if (key == "front_fraction") {
        dos.gen.front_fraction = parse_double(value, where(key));
      } else if (key == "mean_length") {
        dos.gen.mean_length = parse_double(value, where(key));
      } else throw ValidationError("unknown key " + where(key));
    } else if (section == "run") {
      if (key == "horizon") horizon = parse_long(value, where(key));
      else if (key == "seed")
        run_seed = static_cast<std::uint64_t>(parse_long(value, where(key)));
      else if (key == "transient_cut")
        transient_cut = parse_long(value, where(key));
      else throw ValidationError("unknown key " + where(key));
    } else if (section == "analysis") {
      if (key == "b_t") analysis.b_t = parse_double(value, where(key));
      else if (key == "b_c") analysis.b_c = parse_double(value, where(key));
      else if (key == "alpha1") analysis.alpha1 = parse_double(value, where(key));
      else if (key == "alpha2") analysis.alpha2 = parse_double(value, where(key));
      else throw ValidationError("unknown key " + where(key));
    } else {
      throw ValidationError("key outside any section at line " +
                            std::to_string(lineno));
    }
  }

  if (!adjacency_text) throw ValidationError("missing [graph] adjacency");
  if (!pins_text) throw ValidationError("missing [graph] pins");
  if (!leader_text) throw ValidationError("missing [leader] expression");
  if (agents.empty()) throw ValidationError("no [agent] sections");
  if (!dos_seen || !dos_m_set || !dos_beta_set)
    throw ValidationError("missing [dos] section with M and beta");
  if (!horizon) throw ValidationError("missing [run] horizon");

  // Graph: adjacency rows split on ';', entries whitespace-separated.
  std::vector<std::vector<long>> rows;
  {
    std::istringstream row_stream(*adjacency_text);
    std::string row_text;
    while (std::getline(row_stream, row_text, ';')) {
      std::istringstream iss(row_text);
      std::vector<long> row;
      long v;
      while (iss >> v) row.push_back(v);
      if (!row.empty()) rows.push_back(std::move(row));
    }
  }
  const long n = static_cast<long>(rows.size());
  if (graph_n && *graph_n != n)
    throw ValidationError("[graph] n does not match adjacency row count");
  Eigen::MatrixXi adj(n, n);
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw ValidationError("adjacency must be square");
    for (long j = 0; j < n; ++j)
      adj(i, j) = static_cast<int>(rows[static_cast<std::size_t>(i)]
                                       [static_cast<std::size_t>(j)]);
  }
  Eigen::VectorXi pins(n);
  {
    std::istringstream iss(*pins_text);
    long v, i = 0;
    while (iss >> v) {
      if (i >= n) throw ValidationError("too many pin entries");
      pins(i++) = static_cast<int>(v);
    }
    if (i != n) throw ValidationError("pins length must equal graph size");
  }

  if (static_cast<long>(agents.size()) != n)
    throw ValidationError("agent count (" + std::to_string(agents.size()) +
                          ") must equal graph size (" + std::to_string(n) + ")");

  LoadedScenario out;
  out.analysis = analysis;
  Scenario& sc = out.scenario;
  sc.graph = make_graph(std::move(adj), std::move(pins));
  sc.leader.trajectory = parse_expr(*leader_text);
  sc.tl_gains = tl_gains;
  sc.cpl_gains = cpl_gains;
  validate(sc.tl_gains);
  validate(sc.cpl_gains);
  sc.comp = comp;
  if (comp.enabled) {
    if (!comp_set_d_bar) throw ValidationError("missing [cpl] d_bar");
    if (!comp_set_gamma_r) throw ValidationError("missing [cpl] gamma_r");
    validate(sc.comp, sc.cpl_gains.gamma);
  }

  sc.horizon = *horizon;
  if (sc.horizon < 1) throw ValidationError("[run] horizon must be >= 1");
  sc.seed = run_seed;

  sc.dos = dos;
  validate_budget_params(sc.dos.budget);
  sc.dos.has_budget = true;
  sc.dos.seed = dos_seed ? *dos_seed : run_seed;

  sc.initial_ytl.resize(n);
  sc.initial_y.resize(n);
  sc.initial_utl.resize(n);
  sc.initial_u.resize(n);
  bool any_ytl_init = false;
  for (const auto& a : agents) any_ytl_init = any_ytl_init || a.ytl_init.has_value();
  for (long i = 0; i < n; ++i) {
    const detail::AgentSpec& a = agents[static_cast<std::size_t>(i)];
    if (!a.cpl)
      throw ValidationError("agent " + std::to_string(i + 1) +
                            " missing cpl dynamics");
    if (!a.tl)
      throw ValidationError("agent " + std::to_string(i + 1) +
                            " missing tl dynamics");
    AgentModel cpl_model{parse_expr(*a.cpl), AgentRole::kCplFollower};
    AgentModel tl_model{parse_expr(*a.tl), AgentRole::kTlFollower};
    sc.cpl_models.push_back(std::move(cpl_model));
    sc.tl_models.push_back(std::move(tl_model));
    sc.aa.push_back(AASignal{parse_expr(a.aa ? *a.aa : "0"), comp.d_bar});

    // Twin outputs default to the standard four-agent initial offsets when
    // no agent specifies one; everything else starts at rest.
    double ytl_default = (!any_ytl_init && n == 4)
                             ? std::vector<double>{0.1, 0.2, 0.2, 0.3}
                                   [static_cast<std::size_t>(i)]
                             : 0.0;
    sc.initial_ytl(i) = a.ytl_init.value_or(ytl_default);
    sc.initial_y(i) = a.y_init.value_or(0.0);
    sc.initial_utl(i) = a.utl_init.value_or(0.0);
    sc.initial_u(i) = a.u_init.value_or(0.0);
  }

  if (transient_cut) {
    if (*transient_cut < 0 || *transient_cut > sc.horizon)
      throw ValidationError("[run] transient_cut must lie in [0, horizon]");
  }
  out.transient_cut = transient_cut ? *transient_cut : -1;
  return out;
}

// Loads a scenario file; the RESILIENT_DMFAC_SEED environment variable, when
// set, overrides the file's run seed (and the DoS seed, unless the file pins
// one explicitly — but note an env override also moves a defaulted DoS seed).
inline LoadedScenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file: " + path);
  LoadedScenario loaded = parse_scenario(in);
  if (const char* env = std::getenv("RESILIENT_DMFAC_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw ValidationError("RESILIENT_DMFAC_SEED must be an integer");
    bool dos_followed_run =
        loaded.scenario.dos.seed == loaded.scenario.seed;
    loaded.scenario.seed = static_cast<std::uint64_t>(v);
    if (dos_followed_run) loaded.scenario.dos.seed = loaded.scenario.seed;
  }
  return loaded;
}

}  // namespace dmfac
