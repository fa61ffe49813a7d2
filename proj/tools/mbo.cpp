// Command line front end: run, sweep, check, energy.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mbo/experiment.hpp"

namespace {

int with_config(const std::string& path, int (*cmd)(const mbo::ExperimentConfig&, std::ostream&, std::ostream&)) {
  try {
    return cmd(mbo::load_config(path), std::cout, std::cerr);
  } catch (const mbo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mbo::kExitConfigError;
  }
}

std::optional<mbo::ExperimentConfig> optional_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return mbo::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thresholding schemes for (volume-preserving, forced, multiphase) mean-curvature flow"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a configured experiment; writes dumps and ledger.csv");
  run->add_option("config", config_path, "Experiment config file")->required();

  auto* sweep = app.add_subcommand("sweep", "Convergence or multiplier-scaling sweep over h (and n)");
  sweep->add_option("config", config_path, "Experiment config file")->required();

  std::vector<std::string> dumps;
  std::string check_config;
  auto* check = app.add_subcommand("check", "Re-run the energy-dissipation audit on stored dumps");
  check->add_option("dumps", dumps, "Consecutive step dumps")->required();
  check->add_option("--config", check_config, "Config giving scheme, force and tensions");

  std::string energy_dump;
  double h = 0.0;
  std::string energy_config;
  auto* energy = app.add_subcommand("energy", "Print E_h of a dump");
  energy->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  energy->add_option("dump", energy_dump, "Dump file")->required();
  energy->add_option("--h", h, "Kernel time scale")->required();
  energy->add_option("--config", energy_config, "Config giving tensions for multiphase dumps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mbo::kExitConfigError;
  }

  if (*run) return with_config(config_path, mbo::cmd_run);
  if (*sweep) return with_config(config_path, mbo::cmd_sweep);
  try {
    if (*check) return mbo::cmd_check(dumps, optional_config(check_config), std::cout, std::cerr);
    return mbo::cmd_energy(energy_dump, h, optional_config(energy_config), std::cout, std::cerr);
  } catch (const mbo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mbo::kExitConfigError;
  }
}
