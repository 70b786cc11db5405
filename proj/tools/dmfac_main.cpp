// Command-line front end: run / check / sweep over scenario files.

#include <string>

#include <CLI11.hpp>

#include "dmfac/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Resilient double-layer model-free consensus simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir, param;
  double from = 0.0, to = 0.0;
  long steps = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "Simulate and write outputs");
  run_cmd->add_option("--scenario", scenario, "Scenario file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* check_cmd =
      app.add_subcommand("check", "Evaluate feasibility conditions only");
  check_cmd->add_option("--scenario", scenario, "Scenario file")->required();

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Sweep one attack parameter");
  sweep_cmd->add_option("--scenario", scenario, "Scenario file")->required();
  sweep_cmd->add_option("--param", param, "One of: beta, M, d_bar")->required();
  sweep_cmd->add_option("--from", from, "Range start")->required();
  sweep_cmd->add_option("--to", to, "Range end")->required();
  sweep_cmd->add_option("--steps", steps, "Number of points")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a validation error
  }

  if (run_cmd->parsed()) return dmfac::cmd_run(scenario, out_dir);
  if (check_cmd->parsed()) return dmfac::cmd_check(scenario);
  return dmfac::cmd_sweep(scenario, param, from, to, steps, out_dir);
}
