#include "lyhlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "lyhlab/error.hpp"
#include "lyhlab/trajectory_io.hpp"

namespace lyhlab::experiment {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kDominanceVectors = 10;
constexpr std::uint64_t kDominanceSeed = 20240611;

template <typename T>
T read(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key + ": wrong type");
  }
}

void reject_unknown(const json& obj, const std::vector<std::string>& known, const std::string& path) {
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError(path + item.key() + ": unknown field");
    }
  }
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& path,
                                 std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& node = obj.at(key);
  if (node.is_number()) return {node.get<double>()};
  if (!node.is_array()) throw ConfigError(path + key + ": expected a number or a list");
  std::vector<double> out;
  for (const auto& v : node) {
    if (!v.is_number()) throw ConfigError(path + key + ": list entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

fields::GeneratorSpec parse_generator(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  reject_unknown(obj, {"generator", "value", "mean", "amplitude", "axis", "mode", "max_mode", "seed",
                       "ratio", "time"},
                 path + ".");
  fields::GeneratorSpec spec;
  const std::string kind = read<std::string>(obj, "generator", path + ".", "constant");
  try {
    spec.kind = fields::generator_kind_from_string(kind);
  } catch (const ConfigError&) {
    throw ConfigError(path + ".generator: unknown generator '" + kind + "'");
  }
  spec.mean = read<double>(obj, "mean", path + ".", read<double>(obj, "value", path + ".", spec.mean));
  spec.amplitude = read<double>(obj, "amplitude", path + ".", spec.amplitude);
  spec.axis = read<int>(obj, "axis", path + ".", spec.axis);
  spec.mode = read<int>(obj, "mode", path + ".", spec.mode);
  spec.max_mode = read<int>(obj, "max_mode", path + ".", spec.max_mode);
  spec.seed = read<std::uint64_t>(obj, "seed", path + ".", spec.seed);
  spec.ratio = read<double>(obj, "ratio", path + ".", spec.ratio);
  spec.time = read<double>(obj, "time", path + ".", spec.time);
  return spec;
}

ordered_json generator_json(const fields::GeneratorSpec& s) {
  ordered_json j;
  j["generator"] = fields::to_string(s.kind);
  j["mean"] = s.mean;
  j["amplitude"] = s.amplitude;
  j["axis"] = s.axis;
  j["mode"] = s.mode;
  j["max_mode"] = s.max_mode;
  j["seed"] = s.seed;
  j["ratio"] = s.ratio;
  j["time"] = s.time;
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

/// Writes through a temporary file and renames, so readers never see partial output.
void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("output.directory: cannot write " + path.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

bool is_torus(const ExperimentConfig& c) { return c.model.kind == geom::ModelKind::FlatTorus; }

std::string run_label(double epsilon) {
  std::ostringstream out;
  out << "eps_" << epsilon;
  return out.str();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown(doc, {"schema_version", "model", "epsilon", "initial_data", "schedule",
                       "tolerances", "suites", "identities", "output", "sweep", "threads"},
                 "");
  const int version = read<int>(doc, "schema_version", "", kSchemaVersion);
  if (version != kSchemaVersion) throw ConfigError("schema_version: unsupported version");

  ExperimentConfig c;
  if (!doc.contains("model")) throw ConfigError("model: missing");
  const json& m = doc.at("model");
  reject_unknown(m, {"kind", "complex_dimension", "periods", "resolution", "a0"}, "model.");
  const std::string kind = read<std::string>(m, "kind", "model.", "flat_torus");
  try {
    c.model.kind = geom::model_kind_from_string(kind);
  } catch (const ConfigError&) {
    throw ConfigError("model.kind: unknown model '" + kind + "'");
  }
  c.model.complex_dimension = read<int>(m, "complex_dimension", "model.", 1);
  c.model.grid_resolution = read<int>(m, "resolution", "model.", 64);
  if (c.model.kind == geom::ModelKind::FlatTorus) {
    std::vector<double> periods = number_list(m, "periods", "model.", {1.0});
    if (periods.size() == 1) {
      periods.assign(static_cast<std::size_t>(2 * std::max(c.model.complex_dimension, 1)),
                     periods.front());
    }
    c.model.periods = periods;
  }
  c.a0 = read<double>(m, "a0", "model.", 1.0);
  try {
    c.model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.") + e.what());
  }
  if (!(c.a0 > 0.0)) throw ConfigError("model.a0: must be positive");

  c.epsilons = number_list(doc, "epsilon", "", {0.0});
  if (c.epsilons.empty()) throw ConfigError("epsilon: list is empty");
  for (double e : c.epsilons) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("epsilon: values must be >= 0");
  }

  if (doc.contains("initial_data")) {
    const json& init = doc.at("initial_data");
    reject_unknown(init, {"u", "v"}, "initial_data.");
    if (init.contains("u")) c.u = parse_generator(init.at("u"), "initial_data.u");
    if (init.contains("v")) c.v = parse_generator(init.at("v"), "initial_data.v");
  }
  if (!doc.contains("initial_data") || !doc.at("initial_data").contains("v")) {
    c.v.kind = fields::GeneratorKind::Constant;
    c.v.mean = 0.0;
  }

  if (doc.contains("schedule")) {
    const json& s = doc.at("schedule");
    reject_unknown(s, {"t_start", "t_end", "steps", "stride", "probe_dt"}, "schedule.");
    c.schedule.t_start = read<double>(s, "t_start", "schedule.", c.schedule.t_start);
    c.schedule.t_end = read<double>(s, "t_end", "schedule.", c.schedule.t_end);
    c.schedule.steps = read<int>(s, "steps", "schedule.", c.schedule.steps);
    c.schedule.stride = read<int>(s, "stride", "schedule.", c.schedule.stride);
    c.schedule.probe_dt = read<double>(s, "probe_dt", "schedule.", c.schedule.probe_dt);
  }
  try {
    c.schedule.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("schedule.") + e.what());
  }
  if (!(c.schedule.t_start > 0.0)) throw ConfigError("schedule.t_start: reports need t_start > 0");

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    reject_unknown(t, {"positivity", "identity", "identity_slope", "inequality", "sharpness",
                       "mass_torus", "mass_cp1", "dominance"},
                   "tolerances.");
    Tolerances& tol = c.tolerances;
    tol.positivity = read<double>(t, "positivity", "tolerances.", tol.positivity);
    tol.identity = read<double>(t, "identity", "tolerances.", tol.identity);
    tol.identity_slope = read<double>(t, "identity_slope", "tolerances.", tol.identity_slope);
    tol.inequality = read<double>(t, "inequality", "tolerances.", tol.inequality);
    tol.sharpness = read<double>(t, "sharpness", "tolerances.", tol.sharpness);
    tol.mass_torus = read<double>(t, "mass_torus", "tolerances.", tol.mass_torus);
    tol.mass_cp1 = read<double>(t, "mass_cp1", "tolerances.", tol.mass_cp1);
    tol.dominance = read<double>(t, "dominance", "tolerances.", tol.dominance);
  }
  if (doc.contains("suites")) {
    const json& s = doc.at("suites");
    reject_unknown(s, {"positivity", "identities", "sharpness", "conservation"}, "suites.");
    c.suites.positivity = read<bool>(s, "positivity", "suites.", c.suites.positivity);
    c.suites.identities = read<bool>(s, "identities", "suites.", c.suites.identities);
    c.suites.sharpness = read<bool>(s, "sharpness", "suites.", c.suites.sharpness);
    c.suites.conservation = read<bool>(s, "conservation", "suites.", c.suites.conservation);
  }
  if (doc.contains("identities")) {
    const json& s = doc.at("identities");
    reject_unknown(s, {"times", "dts"}, "identities.");
    c.identity_times = number_list(s, "times", "identities.", c.identity_times);
    c.identity_dts = number_list(s, "dts", "identities.", c.identity_dts);
  }
  for (double dt : c.identity_dts) {
    if (!(dt > 0.0)) throw ConfigError("identities.dts: values must be positive");
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, {"directory", "fields"}, "output.");
    c.output_dir = read<std::string>(o, "directory", "output.", c.output_dir);
    c.write_fields = read<bool>(o, "fields", "output.", c.write_fields);
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    reject_unknown(s, {"epsilon", "resolution", "seed", "dt"}, "sweep.");
    for (const auto& item : s.items()) {
      c.sweep_values[item.key()] = number_list(s, item.key(), "sweep.", {});
    }
  }
  c.threads = read<int>(doc, "threads", "", 0);
  if (c.threads < 0) throw ConfigError("threads: must be >= 0");

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return parse_config(doc);
}

void validate(const ExperimentConfig& c) {
  for (double eps : c.epsilons) {
    const double extinction = geom::extinction_time(c.model, c.a0, eps);
    if (!(c.schedule.t_end < extinction)) {
      std::ostringstream msg;
      msg << "schedule.t_end: " << c.schedule.t_end << " is not before the extinction time "
          << extinction << " for epsilon = " << eps;
      throw ConfigError(msg.str());
    }
    if (c.suites.identities) {
      for (double t : c.identity_times) {
        for (double dt : c.identity_dts) {
          if (!(t - dt > 0.0) || !(t + dt < extinction)) {
            throw ConfigError("identities.times: probe window leaves the admissible interval");
          }
        }
      }
    }
  }
  if (c.u.kind == fields::GeneratorKind::Proportional) {
    throw ConfigError("initial_data.u.generator: u cannot be proportional");
  }
  if (c.u.kind == fields::GeneratorKind::Gaussian) {
    if (!is_torus(c)) throw ConfigError("initial_data.u.generator: gaussian needs a flat torus");
    const bool zero_v = c.v.kind == fields::GeneratorKind::Constant && c.v.mean == 0.0;
    const bool scaled_v = c.v.kind == fields::GeneratorKind::Proportional;
    if (!zero_v && !scaled_v) {
      throw ConfigError("initial_data.v.generator: gaussian u requires v = 0 or proportional");
    }
    if (scaled_v && !(std::abs(c.v.ratio) < 1.0)) {
      throw ConfigError("initial_data.v.ratio: ordering margin is not positive");
    }
    return;
  }
  const fields::GridPtr grid = fields::make_grid(c.model);
  const fields::ScalarField u0 = fields::generate(grid, c.u, c.a0);
  const fields::ScalarField v0 = fields::generate(grid, c.v, c.a0, &u0);
  if (!(u0.min_real() > 0.0)) throw ConfigError("initial_data.u: u0 must be positive");
  const double margin = flow::ordering_margin(u0, v0);
  if (!(margin > 0.0)) {
    std::ostringstream msg;
    msg << "initial_data.v.amplitude: initial ordering margin " << margin << " is not positive";
    throw ConfigError(msg.str());
  }
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"kind", geom::to_string(c.model.kind)},
                {"complex_dimension", c.model.complex_dimension},
                {"periods", c.model.periods},
                {"resolution", c.model.grid_resolution},
                {"a0", c.a0}};
  j["epsilon"] = c.epsilons;
  j["initial_data"] = {{"u", generator_json(c.u)}, {"v", generator_json(c.v)}};
  j["schedule"] = {{"t_start", c.schedule.t_start},
                   {"t_end", c.schedule.t_end},
                   {"steps", c.schedule.steps},
                   {"stride", c.schedule.stride},
                   {"probe_dt", c.schedule.probe_dt}};
  const Tolerances& t = c.tolerances;
  j["tolerances"] = {{"positivity", t.positivity},       {"identity", t.identity},
                     {"identity_slope", t.identity_slope}, {"inequality", t.inequality},
                     {"sharpness", t.sharpness},         {"mass_torus", t.mass_torus},
                     {"mass_cp1", t.mass_cp1},           {"dominance", t.dominance}};
  j["suites"] = {{"positivity", c.suites.positivity},
                 {"identities", c.suites.identities},
                 {"sharpness", c.suites.sharpness},
                 {"conservation", c.suites.conservation}};
  j["identities"] = {{"times", c.identity_times}, {"dts", c.identity_dts}};
  j["output"] = {{"directory", c.output_dir}, {"fields", c.write_fields}};
  ordered_json sweep = ordered_json::object();
  for (const auto& [axis, values] : c.sweep_values) sweep[axis] = values;
  j["sweep"] = sweep;
  j["threads"] = c.threads;
  return j;
}

flow::FlowTrajectory build_trajectory(const ExperimentConfig& c, double epsilon) {
  if (c.u.kind == fields::GeneratorKind::Gaussian) {
    const double ratio = c.v.kind == fields::GeneratorKind::Proportional ? c.v.ratio : 0.0;
    return flow::heat_kernel_trajectory(c.model, c.schedule, c.a0, ratio);
  }
  const fields::GridPtr grid = fields::make_grid(c.model);
  const fields::ScalarField u0 = fields::generate(grid, c.u, c.a0);
  const fields::ScalarField v0 = fields::generate(grid, c.v, c.a0, &u0);
  return flow::evolve_pair(c.model, epsilon, u0, v0, c.schedule, c.a0);
}

namespace {

EpsilonSummary run_epsilon(const ExperimentConfig& c, double epsilon,
                           const std::filesystem::path& out_dir, std::vector<std::string>& failures,
                           std::ostream& log) {
  EpsilonSummary s;
  s.epsilon = epsilon;
  const flow::FlowTrajectory traj = build_trajectory(c, epsilon);
  const bool torus = is_torus(c);

  if (c.u.kind == fields::GeneratorKind::Gaussian) {
    const flow::FlowSnapshot first = traj.snapshot(0);
    s.initial_margin = flow::ordering_margin(first.u, first.v);
  } else {
    const fields::GridPtr grid = fields::make_grid(c.model);
    const fields::ScalarField u0 = fields::generate(grid, c.u, c.a0);
    s.initial_margin = flow::ordering_margin(u0, fields::generate(grid, c.v, c.a0, &u0));
  }

  lyh::ReportOptions options;
  options.tolerance = c.tolerances.positivity;
  options.include_y = true;
  s.report.epsilon = epsilon;
  s.report.tolerance = options.tolerance;
  s.max_dominance = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const flow::FlowSnapshot pair = traj.snapshot(k);
    const lyh::LYHSnapshot snap = lyh::assemble(pair, epsilon);
    s.report.rows.push_back(
        lyh::summarize(snap, pair, options, &s.report.violations, &s.report.violation_count));
    if (c.suites.positivity) {
      s.max_dominance = std::max(s.max_dominance,
                                 lyh::dominance_violation(snap, kDominanceVectors, kDominanceSeed + k));
    }
  }
  s.report.verdict = s.report.violation_count == 0;

  const auto& rows = s.report.rows;
  s.min_q = std::numeric_limits<double>::infinity();
  s.min_q_unconstrained = std::numeric_limits<double>::infinity();
  s.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    s.min_q = std::min(s.min_q, row.min_q);
    s.min_q_unconstrained = std::min(s.min_q_unconstrained, row.min_q_unconstrained);
    if (row.min_y) s.min_y = std::min(s.min_y.value_or(*row.min_y), *row.min_y);
    s.min_margin = std::min(s.min_margin, row.margin);
    s.max_mass_drift =
        std::max(s.max_mass_drift, std::abs(row.mass - rows.front().mass) / std::abs(rows.front().mass));
    s.max_sharpness_gap = std::max(s.max_sharpness_gap, std::abs(row.min_q) * row.t);
  }

  auto fail = [&](const std::string& message) {
    s.passed = false;
    std::ostringstream msg;
    msg << "epsilon = " << epsilon << ": " << message;
    failures.push_back(msg.str());
    log << "FAIL " << msg.str() << '\n';
  };

  if (c.suites.positivity) {
    if (!s.report.verdict) {
      std::ostringstream msg;
      msg << "positivity: " << s.report.violation_count << " violating (node, t) pairs";
      for (const auto& v : s.report.violations) {
        msg << "; " << v.quantity << " node " << v.node << " t " << v.t << " value " << v.value;
      }
      fail(msg.str());
    }
    if (s.max_dominance > c.tolerances.dominance) {
      std::ostringstream msg;
      msg << "dominance: w*(Q - Q_unconstrained)w reaches " << s.max_dominance;
      fail(msg.str());
    }
  }
  if (c.suites.conservation) {
    const double tol = torus ? c.tolerances.mass_torus : c.tolerances.mass_cp1;
    if (s.max_mass_drift > tol) {
      std::ostringstream msg;
      msg << "conservation: relative mass drift " << s.max_mass_drift << " exceeds " << tol;
      fail(msg.str());
    }
    if (!(s.min_margin > 0.0) || s.min_margin < 0.5 * s.initial_margin) {
      std::ostringstream msg;
      msg << "conservation: ordering margin fell to " << s.min_margin << " (initial "
          << s.initial_margin << ")";
      fail(msg.str());
    }
  }
  if (c.suites.sharpness && s.max_sharpness_gap > c.tolerances.sharpness) {
    std::ostringstream msg;
    msg << "sharpness: |min Q| t reaches " << s.max_sharpness_gap;
    fail(msg.str());
  }
  if (c.suites.identities) {
    checks::SuiteOptions opts;
    opts.times = c.identity_times;
    opts.dts = c.identity_dts;
    opts.tolerance.floor = c.tolerances.identity;
    opts.tolerance.slope = c.tolerances.identity_slope;
    opts.inequality_tolerance = c.tolerances.inequality;
    s.identities = checks::run_identity_suite({&traj}, opts);
    for (const auto& r : s.identities.residuals) {
      if (r.identity_id != "q_inequality") s.max_rel_residual = std::max(s.max_rel_residual, r.rel_residual);
      double& worst = s.max_abs_residual[r.identity_id];
      worst = std::max(worst, r.abs_residual);
    }
    if (!s.identities.passed) fail("identities: " + s.identities.failure);
  }
  if (c.write_fields) {
    flow::write_trajectory(traj, out_dir / "fields" / run_label(epsilon));
  }
  log << "epsilon = " << epsilon << ": min Q " << s.min_q << ", min Q (unconstrained) "
      << s.min_q_unconstrained;
  if (s.min_y) log << ", min Y " << *s.min_y;
  log << ", margin " << s.min_margin << ", mass drift " << s.max_mass_drift
      << (s.passed ? ", pass" : ", FAIL") << '\n';
  return s;
}

}  // namespace

RunResult run(const ExperimentConfig& c, const std::filesystem::path& out_dir, std::ostream& log) {
  validate(c);
  std::filesystem::create_directories(out_dir);
  RunResult result;
  for (double eps : c.epsilons) {
    result.per_epsilon.push_back(run_epsilon(c, eps, out_dir, result.failures, log));
    if (!result.per_epsilon.back().passed) result.passed = false;
  }

  std::ostringstream report;
  report << "t,min_q,min_q_unconstrained,min_y,margin,mass,epsilon\n";
  std::ostringstream residuals;
  residuals << "identity_id,t,abs_residual,rel_residual,grid,dt,epsilon\n";
  std::ostringstream summary;
  summary << "epsilon,verdict,min_q,min_q_unconstrained,min_y,min_margin,initial_margin,"
             "max_mass_drift,max_sharpness_gap,max_dominance,max_rel_residual\n";
  ordered_json violations = ordered_json::array();
  for (const auto& s : result.per_epsilon) {
    for (const auto& row : s.report.rows) {
      report << format_number(row.t) << ',' << format_number(row.min_q) << ','
             << format_number(row.min_q_unconstrained) << ',' << format_optional(row.min_y) << ','
             << format_number(row.margin) << ',' << format_number(row.mass) << ','
             << format_number(s.epsilon) << '\n';
    }
    for (const auto& r : s.identities.residuals) {
      residuals << r.identity_id << ',' << format_number(r.t) << ',' << format_number(r.abs_residual)
                << ',' << format_number(r.rel_residual) << ',' << r.grid << ','
                << format_number(r.dt) << ',' << format_number(r.epsilon) << '\n';
    }
    summary << format_number(s.epsilon) << ',' << (s.passed ? "pass" : "fail") << ','
            << format_number(s.min_q) << ',' << format_number(s.min_q_unconstrained) << ','
            << format_optional(s.min_y) << ',' << format_number(s.min_margin) << ','
            << format_number(s.initial_margin) << ',' << format_number(s.max_mass_drift) << ','
            << format_number(s.max_sharpness_gap) << ','
            << format_number(c.suites.positivity ? s.max_dominance : 0.0) << ','
            << format_number(s.max_rel_residual) << '\n';
    for (const auto& v : s.report.violations) {
      violations.push_back({{"epsilon", s.epsilon}, {"quantity", v.quantity}, {"t", v.t},
                            {"node", v.node}, {"value", v.value}});
    }
  }

  ordered_json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["library"] = "lyhlab";
  manifest["version"] = kVersion;
  manifest["config"] = to_json(c);
  manifest["verdict"] = result.passed ? "pass" : "fail";
  manifest["failures"] = result.failures;
  manifest["violations"] = violations;
  ordered_json fits = ordered_json::array();
  for (const auto& s : result.per_epsilon) {
    for (const auto& f : s.identities.fits) {
      fits.push_back({{"epsilon", s.epsilon}, {"identity_id", f.identity_id}, {"t", f.t},
                      {"order", f.resolved ? ordered_json(f.order) : ordered_json(nullptr)}});
    }
  }
  manifest["convergence"] = fits;
  manifest["files"] = {"report.csv", "residuals.csv", "summary.csv"};

  write_atomic(out_dir / "report.csv", report.str());
  write_atomic(out_dir / "residuals.csv", residuals.str());
  write_atomic(out_dir / "summary.csv", summary.str());
  write_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

std::vector<double> sweep_axis_values(const ExperimentConfig& c, const std::string& axis) {
  if (axis != "epsilon" && axis != "resolution" && axis != "seed" && axis != "dt") {
    throw ConfigError("axis: must be one of epsilon, resolution, seed, dt");
  }
  auto it = c.sweep_values.find(axis);
  if (it != c.sweep_values.end() && !it->second.empty()) return it->second;
  if (axis == "epsilon") return {0.0, 0.5, 1.0};
  if (axis == "resolution") return {32.0, 64.0};
  if (axis == "dt") return {4e-4, 2e-4, 1e-4};
  std::vector<double> seeds;
  for (int s = 1; s <= 20; ++s) seeds.push_back(s);
  return seeds;
}

ExperimentConfig apply_axis(const ExperimentConfig& c, const std::string& axis, double value) {
  ExperimentConfig out = c;
  if (axis == "epsilon") {
    out.epsilons = {value};
  } else if (axis == "resolution") {
    out.model.grid_resolution = static_cast<int>(value);
    try {
      out.model.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("sweep.resolution: ") + e.what());
    }
  } else if (axis == "seed") {
    const auto seed = static_cast<std::uint64_t>(value);
    out.u.seed = seed;
    out.v.seed = seed ^ kSeedMix;
  } else if (axis == "dt") {
    out.identity_dts = {value};
    out.suites.identities = true;
  } else {
    throw ConfigError("axis: must be one of epsilon, resolution, seed, dt");
  }
  validate(out);
  return out;
}

int worker_count(const ExperimentConfig& c, std::size_t jobs) {
  int workers = c.threads > 0 ? c.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("LYHLAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) workers = std::min(workers, static_cast<int>(cap));
  }
  return std::max(1, std::min(workers, static_cast<int>(std::max<std::size_t>(jobs, 1))));
}

bool sweep(const ExperimentConfig& c, const std::string& axis, const std::filesystem::path& out_dir,
           std::ostream& log) {
  const std::vector<double> values = sweep_axis_values(c, axis);
  std::vector<ExperimentConfig> configs;
  for (double v : values) configs.push_back(apply_axis(c, axis, v));
  std::filesystem::create_directories(out_dir);

  std::vector<RunResult> results(values.size());
  std::vector<std::string> logs(values.size());
  std::vector<std::string> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < values.size(); k = next++) {
      std::ostringstream local;
      std::ostringstream dir;
      dir << axis << '_' << k;
      try {
        results[k] = run(configs[k], out_dir / dir.str(), local);
      } catch (const std::exception& e) {
        errors[k] = e.what();
        results[k].passed = false;
      }
      logs[k] = local.str();
    }
  };
  const int workers = worker_count(c, values.size());
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ostringstream summary;
  summary << axis << ",verdict,min_q,min_q_unconstrained,min_y,min_margin,max_mass_drift,"
                     "max_rel_residual,abs_L_evolution,abs_lemma1,abs_lemma3,abs_q_inequality\n";
  bool all = true;
  std::map<std::string, std::vector<double>> series;
  for (std::size_t k = 0; k < values.size(); ++k) {
    log << "[" << axis << " = " << values[k] << "]\n" << logs[k];
    if (!errors[k].empty()) log << "error: " << errors[k] << '\n';
    all = all && results[k].passed;
    double min_q = std::numeric_limits<double>::infinity();
    double min_qu = min_q;
    double min_margin = min_q;
    std::optional<double> min_y;
    double drift = 0.0;
    double rel = 0.0;
    std::map<std::string, double> abs_res;
    for (const auto& s : results[k].per_epsilon) {
      min_q = std::min(min_q, s.min_q);
      min_qu = std::min(min_qu, s.min_q_unconstrained);
      min_margin = std::min(min_margin, s.min_margin);
      if (s.min_y) min_y = std::min(min_y.value_or(*s.min_y), *s.min_y);
      drift = std::max(drift, s.max_mass_drift);
      rel = std::max(rel, s.max_rel_residual);
      for (const auto& [id, v] : s.max_abs_residual) abs_res[id] = std::max(abs_res[id], v);
    }
    if (!errors[k].empty()) min_q = min_qu = min_margin = std::numeric_limits<double>::quiet_NaN();
    auto res = [&](const std::string& id) {
      auto it = abs_res.find(id);
      return it == abs_res.end() ? std::string() : format_number(it->second);
    };
    summary << format_number(values[k]) << ',' << (results[k].passed ? "pass" : "fail") << ','
            << format_number(min_q) << ',' << format_number(min_qu) << ',' << format_optional(min_y)
            << ',' << format_number(min_margin) << ',' << format_number(drift) << ','
            << format_number(rel) << ',' << res("L_evolution") << ',' << res("lemma1") << ','
            << res("lemma3") << ',' << res("q_inequality") << '\n';
    for (const auto& [id, v] : abs_res) series[id].push_back(v);
  }
  if (axis == "dt" && values.size() >= 2) {
    for (const auto& [id, v] : series) {
      if (id == "q_inequality" || v.size() != values.size()) continue;
      log << "fitted dt order for " << id << ": " << checks::fit_convergence_order(values, v) << '\n';
    }
  }
  write_atomic(out_dir / "summary.csv", summary.str());
  return all;
}

std::string describe(const ExperimentConfig& c) {
  std::ostringstream out;
  const fields::GridPtr grid = fields::make_grid(c.model);
  out << "model: " << geom::to_string(c.model.kind) << ", n = " << c.model.complex_dimension;
  if (is_torus(c)) {
    out << ", periods =";
    for (double p : c.model.periods) out << ' ' << p;
  }
  out << "\ngrid: resolution " << c.model.grid_resolution << ", " << grid->size()
      << " nodes, Nyquist " << grid->nyquist_wavenumber() << '\n';
  out << "a0 = " << c.a0 << ", Einstein constant " << geom::einstein_constant(c.model) << '\n';
  for (double eps : c.epsilons) {
    out << "epsilon = " << eps << ": ";
    const double ext = geom::extinction_time(c.model, c.a0, eps);
    if (is_torus(c)) {
      out << "flow static (Ricci-flat)";
    } else if (std::isinf(ext)) {
      out << "flow static (epsilon = 0)";
    } else {
      out << "extinction at t=" << ext;
    }
    out << '\n';
  }
  out << "initial data: u = " << fields::to_string(c.u.kind) << ", v = " << fields::to_string(c.v.kind)
      << '\n';
  const auto times = c.schedule.snapshot_times();
  out << "schedule: t in [" << c.schedule.t_start << ", " << c.schedule.t_end << "], "
      << times.size() << " report times\n";
  out << "suites:";
  if (c.suites.positivity) out << " positivity";
  if (c.suites.identities) out << " identities";
  if (c.suites.sharpness) out << " sharpness";
  if (c.suites.conservation) out << " conservation";
  out << '\n';
  const double snapshot_work =
      static_cast<double>(times.size()) * static_cast<double>(grid->size()) *
      static_cast<double>(c.epsilons.size());
  double identity_work = 0.0;
  if (c.suites.identities) {
    identity_work = 12.0 * static_cast<double>(c.identity_times.size() * c.identity_dts.size()) *
                    static_cast<double>(grid->size()) * static_cast<double>(c.epsilons.size());
  }
  out << "estimated work: " << snapshot_work + identity_work << " node-snapshot evaluations\n";
  return out.str();
}

}  // namespace lyhlab::experiment
