#pragma once

// Configuration-driven experiments: build trajectories, run the enabled suites, write artifacts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyhlab/checks.hpp"
#include "lyhlab/flow.hpp"
#include "lyhlab/generators.hpp"
#include "lyhlab/lyh.hpp"

namespace lyhlab::experiment {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;
/// Seed offset applied to v when a sweep varies the seed.
inline constexpr std::uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;

struct Tolerances {
  double positivity = 1e-6;
  double identity = 1e-5;
  double identity_slope = 1e3;
  double inequality = 1e-4;
  double sharpness = 1e-6;
  double mass_torus = 1e-8;
  double mass_cp1 = 1e-6;
  double dominance = 1e-12;
};

struct Suites {
  bool positivity = true;
  bool identities = false;
  bool sharpness = false;
  bool conservation = true;
};

struct ExperimentConfig {
  geom::ManifoldModel model;
  double a0 = 1.0;
  std::vector<double> epsilons{0.0};
  fields::GeneratorSpec u;
  fields::GeneratorSpec v;
  flow::Schedule schedule;
  Tolerances tolerances;
  Suites suites;
  std::vector<double> identity_times{0.1};
  std::vector<double> identity_dts{4e-4, 2e-4, 1e-4};
  std::string output_dir = "lyhlab_out";
  bool write_fields = false;
  std::map<std::string, std::vector<double>> sweep_values;
  int threads = 0;
};

/// Parses and validates; ConfigError messages start with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExperimentConfig& config);
/// Checks cross-field constraints (extinction, initial ordering margin) without evolving.
void validate(const ExperimentConfig& config);

/// Builds the trajectory for one epsilon of the config.
flow::FlowTrajectory build_trajectory(const ExperimentConfig& config, double epsilon);

struct EpsilonSummary {
  double epsilon = 0.0;
  bool passed = true;
  double min_q = 0.0;
  double min_q_unconstrained = 0.0;
  std::optional<double> min_y;
  double min_margin = 0.0;
  double initial_margin = 0.0;
  double max_mass_drift = 0.0;
  double max_sharpness_gap = 0.0;
  double max_rel_residual = 0.0;
  double max_dominance = 0.0;
  std::map<std::string, double> max_abs_residual;
  lyh::LYHReport report;
  checks::SuiteResult identities;
};

struct RunResult {
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<EpsilonSummary> per_epsilon;
};

/// Runs every epsilon of the config and writes manifest.json, report.csv, residuals.csv,
/// summary.csv (and fields/ when requested) under `out_dir`.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
              std::ostream& log);

/// Values used for a sweep axis: the config's `sweep` entry or the built-in defaults.
std::vector<double> sweep_axis_values(const ExperimentConfig& config, const std::string& axis);
/// Applies one sweep value to a copy of the config.
ExperimentConfig apply_axis(const ExperimentConfig& config, const std::string& axis, double value);

/// One run per axis value in `out_dir`/<axis>_<k>/ on a worker pool capped by LYHLAB_THREADS;
/// writes `out_dir`/summary.csv. Returns true iff every run passed.
bool sweep(const ExperimentConfig& config, const std::string& axis,
           const std::filesystem::path& out_dir, std::ostream& log);

/// Worker count: config threads (or hardware concurrency), capped by LYHLAB_THREADS and `jobs`.
int worker_count(const ExperimentConfig& config, std::size_t jobs);

/// Human-readable plan; performs no evolution.
std::string describe(const ExperimentConfig& config);

}  // namespace lyhlab::experiment
