#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dmfac/cli.hpp"

namespace fs = std::filesystem;

namespace {

std::string scenario_path(const char* name) {
  return std::string(DMFAC_SCENARIO_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Captures std::cout around an in-process command call.
template <typename Fn>
std::pair<int, std::string> capture(Fn&& fn) {
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  int rc = fn();
  std::cout.rdbuf(old);
  return {rc, captured.str()};
}

double parse_key(const std::string& text, const std::string& key) {
  auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::strtod(text.c_str() + pos + key.size() + 1, nullptr);
}

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("dmfac_cli_") + tag);
  fs::remove_all(dir);
  return dir;
}

// Writes a scenario derived from the benchmark file with one line replaced.
fs::path patched_scenario(const char* tag, const std::string& from,
                          const std::string& to) {
  std::string text = slurp(scenario_path("scenario_section5.cfg"));
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  fs::path p = fs::temp_directory_path() / (std::string("dmfac_") + tag + ".cfg");
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

int run_tool(const std::string& args, std::string* stdout_text = nullptr) {
  const char* exe = std::getenv("DMFAC_CLI");
  REQUIRE(exe != nullptr);
  std::string cmd = std::string(exe) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  if (stdout_text) *stdout_text = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run writes the full output bundle") {
  fs::path dir = temp_dir("run");
  auto [rc, echoed] =
      capture([&] { return dmfac::cmd_run(scenario_path("scenario_section5.cfg"),
                                          dir.string()); });
  REQUIRE(rc == 0);
  for (const char* f :
       {"trace.csv", "conditions.txt", "bounds.txt", "plot_errors.dat"}) {
    INFO(f);
    CHECK(fs::exists(dir / f));
  }

  // stdout carries both reports verbatim.
  CHECK(echoed == slurp(dir / "conditions.txt") + slurp(dir / "bounds.txt"));

  std::string bounds = slurp(dir / "bounds.txt");
  CHECK(parse_key(bounds, "bt_observed") <= 0.32);
  CHECK(parse_key(bounds, "b_observed") <= 0.38);
  CHECK(parse_key(bounds, "transient_cut") == 584.0);

  std::string plot = slurp(dir / "plot_errors.dat");
  CHECK(plot.rfind("# k etl_max e_max psi\n", 0) == 0);
  CHECK(std::count(plot.begin(), plot.end(), '\n') == 602);  // header + 601 rows

  // Determinism: a second run reproduces the trace byte for byte.
  std::string first = slurp(dir / "trace.csv");
  fs::path dir2 = temp_dir("run2");
  auto [rc2, echoed2] =
      capture([&] { return dmfac::cmd_run(scenario_path("scenario_section5.cfg"),
                                          dir2.string()); });
  REQUIRE(rc2 == 0);
  CHECK(first == slurp(dir2 / "trace.csv"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("check agrees with the conditions file and flags failures") {
  fs::path dir = temp_dir("check");
  auto [rc_run, run_out] = capture([&] {
    return dmfac::cmd_run(scenario_path("scenario_section5.cfg"), dir.string());
  });
  REQUIRE(rc_run == 0);

  auto [rc, text] = capture(
      [&] { return dmfac::cmd_check(scenario_path("scenario_section5.cfg")); });
  CHECK(rc == 0);
  CHECK(text == slurp(dir / "conditions.txt"));
  fs::remove_all(dir);

  // lambda_t = 0.01 blows the twin-layer gain condition: exit 1, not 2.
  fs::path weak = patched_scenario("weak", "lambda = 1\nepsilon = 1e-5\nphi0 = 1\n\n[cpl]",
                                   "lambda = 0.01\nepsilon = 1e-5\nphi0 = 1\n\n[cpl]");
  auto [rc_weak, weak_text] = capture([&] { return dmfac::cmd_check(weak.string()); });
  CHECK(rc_weak == 1);
  CHECK(weak_text.find("tl_gain_pass=0") != std::string::npos);
  fs::remove(weak);

  // gamma outside (0,1) is a malformed scenario: exit 2.
  fs::path bad = patched_scenario("badgamma", "[cpl]\neta = 1\nmu = 1\ngamma = 0.8",
                                  "[cpl]\neta = 1\nmu = 1\ngamma = 0");
  auto [rc_bad, bad_text] = capture([&] { return dmfac::cmd_check(bad.string()); });
  CHECK(rc_bad == 2);
  CHECK(bad_text.empty());
  fs::remove(bad);

  auto [rc_missing, missing_text] =
      capture([&] { return dmfac::cmd_check("/nonexistent/scenario.cfg"); });
  CHECK(rc_missing == 2);
}

TEST_CASE("scenario parse errors surface as exit 2") {
  fs::path unknown = patched_scenario("unknown", "horizon = 600",
                                      "horizon = 600\nbogus_key = 1");
  CHECK(capture([&] { return dmfac::cmd_check(unknown.string()); }).first == 2);
  fs::remove(unknown);

  // Dropping one agent breaks the agent-count/graph-size match.
  std::string text = slurp(scenario_path("scenario_section5.cfg"));
  auto pos = text.find("[agent]  # 4");
  REQUIRE(pos != std::string::npos);
  fs::path short_file = fs::temp_directory_path() / "dmfac_short.cfg";
  {
    std::ofstream out(short_file, std::ios::binary);
    out << text.substr(0, pos) << text.substr(text.find("\n[tl]") + 1);
  }
  CHECK(capture([&] { return dmfac::cmd_check(short_file.string()); }).first == 2);
  fs::remove(short_file);

  fs::path late_cut = patched_scenario("latecut", "horizon = 600",
                                       "horizon = 600\ntransient_cut = 601");
  CHECK(capture([&] { return dmfac::cmd_check(late_cut.string()); }).first == 2);
  fs::remove(late_cut);
}

TEST_CASE("environment seed override rewires run and schedule seeds") {
  REQUIRE(setenv("RESILIENT_DMFAC_SEED", "99", 1) == 0);
  auto loaded = dmfac::load_scenario_file(scenario_path("scenario_section5.cfg"));
  CHECK(loaded.scenario.seed == 99);
  CHECK(loaded.scenario.dos.seed == 99);  // file leaves the DoS seed defaulted

  REQUIRE(setenv("RESILIENT_DMFAC_SEED", "not-a-number", 1) == 0);
  CHECK_THROWS_AS(dmfac::load_scenario_file(scenario_path("scenario_section5.cfg")),
                  dmfac::ValidationError);
  REQUIRE(unsetenv("RESILIENT_DMFAC_SEED") == 0);

  auto plain = dmfac::load_scenario_file(scenario_path("scenario_section5.cfg"));
  CHECK(plain.scenario.seed == 1);
}

TEST_CASE("sweep emits one row per point with validity and condition flags") {
  fs::path dir = temp_dir("sweep");
  auto [rc, csv] = capture([&] {
    return dmfac::cmd_sweep(scenario_path("scenario_section5.cfg"), "beta",
                            0.05, 0.9, 5, dir.string());
  });
  REQUIRE(rc == 0);
  CHECK(csv == slurp(dir / "sweep.csv"));
  fs::remove_all(dir);

  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "value,valid,conditions_pass,bt_observed,b_observed,diverged");

  // Columns: value,valid,conditions_pass,bt_observed,b_observed,diverged.
  struct Row {
    double value;
    int valid, pass, diverged;
  };
  std::vector<Row> rows;
  while (std::getline(lines, line)) {
    Row r;
    double bt, b;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%d,%lf,%lf,%d", &r.value,
                        &r.valid, &r.pass, &bt, &b, &r.diverged) == 6);
    rows.push_back(r);
  }
  REQUIRE(rows.size() == 5);

  // beta = 0.05 underfunds the bundled schedule's long mid-run burst, and
  // beta beyond the duty-cycle bound (~0.683) flunks the conditions.
  CHECK(rows[0].valid == 0);
  CHECK(rows[1].valid == 1);
  CHECK(rows[1].pass == 1);
  CHECK(rows[2].pass == 1);
  CHECK(rows[3].pass == 0);  // 0.6875 > beta bound
  CHECK(rows[4].pass == 0);
  CHECK(rows[4].valid == 1);  // a generous budget still fits the schedule
  for (const Row& r : rows) CHECK(r.diverged == 0);
}

TEST_CASE("sweeping the variation bound flips signal validity") {
  fs::path dir = temp_dir("sweep_dbar");
  auto [rc, csv] = capture([&] {
    return dmfac::cmd_sweep(scenario_path("scenario_section5.cfg"), "d_bar",
                            0.001, 0.05, 2, dir.string());
  });
  REQUIRE(rc == 0);
  fs::remove_all(dir);
  std::istringstream lines(csv);
  std::string header, low, high;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, low));
  REQUIRE(std::getline(lines, high));
  CHECK(low.substr(low.find(',') + 1, 1) == "0");   // 0.02-per-step ramps break 0.001
  CHECK(high.substr(high.find(',') + 1, 1) == "1"); // .. but respect 0.05
}

TEST_CASE("sweep argument validation") {
  fs::path dir = temp_dir("sweep_bad");
  CHECK(capture([&] {
          return dmfac::cmd_sweep(scenario_path("scenario_section5.cfg"),
                                  "gamma", 0.1, 0.2, 3, dir.string());
        }).first == 2);
  CHECK(capture([&] {
          return dmfac::cmd_sweep(scenario_path("scenario_section5.cfg"),
                                  "beta", 0.1, 0.2, 0, dir.string());
        }).first == 2);
  CHECK(capture([&] {
          return dmfac::cmd_sweep("/nonexistent.cfg", "beta", 0.1, 0.2, 3,
                                  dir.string());
        }).first == 2);
  fs::remove_all(dir);
}

TEST_CASE("installed binary honours the documented grammar") {
  std::string out;
  int rc = run_tool("check --scenario " + scenario_path("scenario_section5.cfg"),
               &out);
  CHECK(rc == 0);
  auto [rc_inproc, expected] = capture(
      [&] { return dmfac::cmd_check(scenario_path("scenario_section5.cfg")); });
  CHECK(out == expected);

  CHECK(run_tool("run") == 2);                       // missing required options
  CHECK(run_tool("") == 2);                          // missing subcommand
  CHECK(run_tool("frobnicate --scenario x") == 2);   // unknown subcommand
  CHECK(run_tool("check --scenario /nonexistent.cfg") == 2);

  fs::path dir = temp_dir("tool_run");
  rc = run_tool("run --scenario " + scenario_path("degenerate_linear.cfg") +
                " --out " + dir.string());
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "trace.csv"));
  fs::remove_all(dir);
}
