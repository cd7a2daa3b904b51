#include "lyhlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lyhlab/error.hpp"
#include "lyhlab/generators.hpp"

namespace lyhlab::flow {
namespace {

// Trajectories larger than this are evaluated on demand instead of cached.
constexpr std::size_t kStoreLimit = std::size_t{1} << 18;

geom::MetricState state_at(const geom::ManifoldModel& model, double epsilon, double a0, double t) {
  geom::MetricState s;
  s.model = model;
  s.a = geom::krf_scale(model, a0, epsilon, t);
  s.t = t;
  s.epsilon = epsilon;
  return s;
}

// int_0^t ds / a(s) and the integrating factor exp(int_0^t eps R ds) = a0 / a(t).
void reparametrize(const geom::ManifoldModel& model, double epsilon, double a0, double t,
                   double& tau, double& factor) {
  const double rate = geom::einstein_constant(model) * epsilon;
  if (rate == 0.0) {
    tau = t / a0;
    factor = 1.0;
    return;
  }
  const double log_ratio = std::log1p(-rate * t / a0);  // ln(a / a0)
  tau = -log_ratio / rate;
  factor = std::exp(-log_ratio);
}

void check_pair(const fields::ScalarField& u, const fields::ScalarField& v, const char* label) {
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (!(u[p].real() > 0.0)) {
      std::ostringstream msg;
      msg << label << ": u is not positive at node " << p << " (u = " << u[p].real() << ")";
      throw DomainError(msg.str());
    }
    if (!(std::abs(v[p].real()) < u[p].real())) {
      std::ostringstream msg;
      msg << label << ": ordering |v| < u fails at node " << p << " (u = " << u[p].real()
          << ", v = " << v[p].real() << ")";
      throw DomainError(msg.str());
    }
  }
}

}  // namespace

void Schedule::validate() const {
  if (!(t_start >= 0.0)) throw ConfigError("t_start: must be >= 0");
  if (!(t_end > t_start)) throw ConfigError("t_end: must exceed t_start");
  if (steps < 1) throw ConfigError("steps: must be >= 1");
  if (stride < 1) throw ConfigError("stride: must be >= 1");
  if (!(probe_dt > 0.0)) throw ConfigError("probe_dt: must be positive");
}

std::vector<double> Schedule::snapshot_times() const {
  validate();
  std::vector<double> out;
  for (int k = 0; k <= steps; k += stride) {
    out.push_back(t_start + (t_end - t_start) * k / steps);
  }
  if (out.back() != t_end) out.push_back(t_end);
  return out;
}

SpectralPairSource::SpectralPairSource(geom::ManifoldModel model, double epsilon, double a0,
                                       const fields::ScalarField& u0,
                                       const fields::ScalarField& v0)
    : model_(std::move(model)), epsilon_(epsilon), a0_(a0), grid_(u0.grid) {
  fields::require_same_grid(u0.grid, v0.grid);
  u_spectrum_ = grid_->analyze(u0.values);
  v_spectrum_ = grid_->analyze(v0.values);
}

fields::ScalarField SpectralPairSource::propagate(const fields::Spectrum& initial, double t,
                                                  bool real) const {
  double tau = 0.0;
  double factor = 1.0;
  reparametrize(model_, epsilon_, a0_, t, tau, factor);
  const auto& lambda = grid_->laplacian_eigenvalues();
  fields::Spectrum evolved = initial;
  for (std::size_t k = 0; k < evolved.coefficients.size(); ++k) {
    evolved.coefficients[k] *= factor * std::exp(lambda[k] * tau);
  }
  ComplexArray values = grid_->synthesize(evolved);
  if (real) {
    for (auto& v : values) v = Complex(v.real(), 0.0);
  }
  return fields::ScalarField(grid_, std::move(values), real);
}

FlowSnapshot SpectralPairSource::at(double t) const {
  FlowSnapshot snap;
  snap.t = t;
  snap.state = state_at(model_, epsilon_, a0_, t);
  snap.u = propagate(u_spectrum_, t, true);
  snap.v = propagate(v_spectrum_, t, true);
  return snap;
}

HeatKernelSource::HeatKernelSource(geom::ManifoldModel model, double a0, double ratio)
    : model_(std::move(model)), a0_(a0), ratio_(ratio), grid_(fields::make_grid(model_)) {
  if (model_.kind != geom::ModelKind::FlatTorus) {
    throw ConfigError("generator: heat-kernel trajectories require a flat torus");
  }
  if (!(std::abs(ratio_) < 1.0)) throw ConfigError("ratio: |v / u| must be below 1");
}

FlowSnapshot HeatKernelSource::at(double t) const {
  if (!(t > 0.0)) throw InputError("heat kernel is singular at t <= 0");
  FlowSnapshot snap;
  snap.t = t;
  snap.state = state_at(model_, 0.0, a0_, t);
  snap.u = fields::heat_kernel(grid_, a0_, t);
  snap.v = snap.u;
  for (auto& v : snap.v.values) v *= ratio_;
  return snap;
}

FlowTrajectory::FlowTrajectory(geom::ManifoldModel model, double epsilon, double a0,
                               std::shared_ptr<const PairSource> source, std::vector<double> times,
                               bool store)
    : model_(std::move(model)),
      epsilon_(epsilon),
      a0_(a0),
      source_(std::move(source)),
      times_(std::move(times)) {
  for (double t : times_) states_.push_back(state_at(model_, epsilon_, a0_, t));
  if (store) {
    for (double t : times_) {
      stored_.push_back(source_->at(t));
      check_pair(stored_.back().u, stored_.back().v, "evolve_pair");
    }
  }
}

FlowSnapshot FlowTrajectory::snapshot(std::size_t i) const {
  if (i >= times_.size()) throw InputError("trajectory index out of range");
  if (!stored_.empty()) return stored_[i];
  return source_->at(times_[i]);
}

FlowSnapshot FlowTrajectory::evaluate(double t) const {
  if (!(t >= 0.0)) throw InputError("evaluation time must be non-negative");
  return source_->at(t);
}

FlowTrajectory evolve_pair(const geom::ManifoldModel& model, double epsilon,
                           const fields::ScalarField& u0, const fields::ScalarField& v0,
                           const Schedule& schedule, double a0) {
  model.validate();
  schedule.validate();
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon: must be >= 0");
  if (!u0.grid || !(u0.grid->model() == model)) {
    throw InputError("evolve_pair: u0 is not sampled on the model grid");
  }
  fields::require_same_grid(u0.grid, v0.grid);
  check_pair(u0, v0, "evolve_pair initial data");
  // Throws ExtinctionError when the flow dies before t_end.
  (void)geom::krf_scale(model, a0, epsilon, schedule.t_end);

  auto source = std::make_shared<SpectralPairSource>(model, epsilon, a0, u0, v0);
  const bool store = u0.grid->size() <= kStoreLimit;
  return FlowTrajectory(model, epsilon, a0, std::move(source), schedule.snapshot_times(), store);
}

FlowTrajectory heat_kernel_trajectory(const geom::ManifoldModel& model, const Schedule& schedule,
                                      double a0, double ratio) {
  model.validate();
  schedule.validate();
  if (!(schedule.t_start > 0.0)) throw ConfigError("t_start: heat kernel requires t_start > 0");
  auto source = std::make_shared<HeatKernelSource>(model, a0, ratio);
  std::size_t size = 1;
  for (int axis = 0; axis < 2 * model.complex_dimension; ++axis) {
    size *= static_cast<std::size_t>(model.grid_resolution);
  }
  return FlowTrajectory(model, 0.0, a0, std::move(source), schedule.snapshot_times(),
                        size <= kStoreLimit);
}

double ordering_margin(const fields::ScalarField& u, const fields::ScalarField& v) {
  fields::require_same_grid(u.grid, v.grid);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < u.size(); ++p) {
    margin = std::min(margin, u[p].real() - std::abs(v[p].real()));
  }
  return margin;
}

double mass(const FlowTrajectory& trajectory, std::size_t index) {
  const FlowSnapshot snap = trajectory.snapshot(index);
  return fields::integrate(snap.u, snap.state);
}

}  // namespace lyhlab::flow
