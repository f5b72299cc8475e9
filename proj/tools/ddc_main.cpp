// ============================================================================
// tools/ddc_main.cpp - command line entry point
//
//   ddc converge --config <path>
//   ddc run      --config <path>
//
// Exit codes: 0 success, 2 configuration error, 3 solver or scheme failure.
// ============================================================================
#include "ddc/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{"Defect-deferred correction Navier-Stokes solver"};
  app.require_subcommand(1);
  std::string config_path;
  auto* converge = app.add_subcommand("converge", "manufactured-solution convergence sweep");
  converge->add_option("--config", config_path, "configuration file")->required();
  auto* run = app.add_subcommand("run", "single runs with diagnostics and snapshots");
  run->add_option("--config", config_path, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ddc::RunConfig config = ddc::load_config(config_path);
    if (converge->parsed()) {
      const ddc::ConvergeReport report = ddc::cmd_converge(config, std::cerr);
      if (!report.complete) {
        std::cerr << "ddc: " << report.failure << '\n';
        return 3;
      }
    } else {
      ddc::cmd_run(config, std::cerr);
    }
  } catch (const ddc::ConfigError& e) {
    std::cerr << "ddc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ddc: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
