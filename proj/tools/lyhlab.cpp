// lyhlab: run, sweep or describe a Harnack verification experiment.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lyhlab/error.hpp"
#include "lyhlab/experiment.hpp"

namespace {

using lyhlab::experiment::ExperimentConfig;

void restrict_suites(ExperimentConfig& config, const std::string& list) {
  if (list.empty()) return;
  config.suites = {false, false, false, false};
  std::stringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (name == "positivity") config.suites.positivity = true;
    else if (name == "identities") config.suites.identities = true;
    else if (name == "sharpness") config.suites.sharpness = true;
    else if (name == "conservation") config.suites.conservation = true;
    else throw lyhlab::ConfigError("suite: unknown suite '" + name + "'");
  }
  lyhlab::experiment::validate(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained matrix Harnack estimate laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string suites;
  std::string axis;

  CLI::App* run_cmd = app.add_subcommand("run", "Evolve, verify and write artifacts");
  run_cmd->add_option("--config", config_path, "Experiment JSON")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  run_cmd->add_option("--suite", suites, "Comma-separated suites to enable");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "One run per value of a parameter axis");
  sweep_cmd->add_option("--config", config_path, "Experiment JSON")->required();
  sweep_cmd->add_option("--axis", axis, "epsilon | resolution | seed | dt")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  sweep_cmd->add_option("--suite", suites, "Comma-separated suites to enable");

  CLI::App* describe_cmd = app.add_subcommand("describe", "Print the resolved plan");
  describe_cmd->add_option("--config", config_path, "Experiment JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig config = lyhlab::experiment::load_config(config_path);
    restrict_suites(config, suites);
    const std::string dir = out_dir.empty() ? config.output_dir : out_dir;

    if (*describe_cmd) {
      std::cout << lyhlab::experiment::describe(config);
      return 0;
    }
    if (*run_cmd) {
      const auto result = lyhlab::experiment::run(config, dir, std::cout);
      std::cout << (result.passed ? "verdict: pass" : "verdict: FAIL") << " (" << dir << ")\n";
      return result.passed ? 0 : 1;
    }
    const bool passed = lyhlab::experiment::sweep(config, axis, dir, std::cout);
    std::cout << (passed ? "sweep verdict: pass" : "sweep verdict: FAIL") << " (" << dir << ")\n";
    return passed ? 0 : 1;
  } catch (const lyhlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
