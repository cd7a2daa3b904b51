#pragma once

// Positive solution pairs of du/dt = Delta_{g(t)} u + eps R(t) u under the homothetic
// eps-Kähler-Ricci flow of the model metrics.
//
// Propagation is exact per Laplacian eigenmode: with tau(t) = int_0^t ds / a(s) and the
// integrating factor a0 / a(t) for the eps R term, c_k(t) = c_k(0) exp(lambda_k tau(t)) a0 / a(t).

#include <memory>
#include <string>
#include <vector>

#include "lyhlab/fields.hpp"
#include "lyhlab/geom.hpp"

namespace lyhlab::flow {

struct Schedule {
  double t_start = 0.01;
  double t_end = 0.5;
  int steps = 49;
  int stride = 1;
  double probe_dt = 1e-4;

  void validate() const;
  /// t_start + k (t_end - t_start) / steps for k = 0, stride, 2 stride, ..., always ending at t_end.
  std::vector<double> snapshot_times() const;
};

struct FlowSnapshot {
  double t = 0.0;
  geom::MetricState state;
  fields::ScalarField u;
  fields::ScalarField v;
};

/// Produces the exact pair at any admissible time.
class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual FlowSnapshot at(double t) const = 0;
  virtual std::string name() const = 0;
};

/// Mode-wise exact propagation of band-limited initial data.
class SpectralPairSource final : public PairSource {
 public:
  SpectralPairSource(geom::ManifoldModel model, double epsilon, double a0,
                     const fields::ScalarField& u0, const fields::ScalarField& v0);
  FlowSnapshot at(double t) const override;
  std::string name() const override { return "spectral"; }

 private:
  fields::ScalarField propagate(const fields::Spectrum& initial, double t, bool real) const;

  geom::ManifoldModel model_;
  double epsilon_;
  double a0_;
  fields::GridPtr grid_;
  fields::Spectrum u_spectrum_;
  fields::Spectrum v_spectrum_;
};

/// Periodized flat heat kernel evaluated in closed form; v = ratio * u.
class HeatKernelSource final : public PairSource {
 public:
  HeatKernelSource(geom::ManifoldModel model, double a0, double ratio);
  FlowSnapshot at(double t) const override;
  std::string name() const override { return "heat_kernel"; }

 private:
  geom::ManifoldModel model_;
  double a0_;
  double ratio_;
  fields::GridPtr grid_;
};

class FlowTrajectory {
 public:
  FlowTrajectory(geom::ManifoldModel model, double epsilon, double a0,
                 std::shared_ptr<const PairSource> source, std::vector<double> times, bool store);

  const geom::ManifoldModel& model() const { return model_; }
  double epsilon() const { return epsilon_; }
  double a0() const { return a0_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  const std::vector<geom::MetricState>& states() const { return states_; }

  /// Snapshot at stored index `i` (cached when the trajectory stores its fields).
  FlowSnapshot snapshot(std::size_t i) const;
  /// Re-evolves the pair to an arbitrary time in the admissible window.
  FlowSnapshot evaluate(double t) const;
  const PairSource& source() const { return *source_; }

 private:
  geom::ManifoldModel model_;
  double epsilon_;
  double a0_;
  std::shared_ptr<const PairSource> source_;
  std::vector<double> times_;
  std::vector<geom::MetricState> states_;
  std::vector<FlowSnapshot> stored_;
};

/// Evolves (u0, v0) given at t = 0. Rejects u0 <= 0, |v0| >= u0 and extinction before t_end.
FlowTrajectory evolve_pair(const geom::ManifoldModel& model, double epsilon,
                           const fields::ScalarField& u0, const fields::ScalarField& v0,
                           const Schedule& schedule, double a0 = 1.0);

/// Heat-kernel trajectory on a flat torus (the equality case of the unconstrained estimate).
FlowTrajectory heat_kernel_trajectory(const geom::ManifoldModel& model, const Schedule& schedule,
                                      double a0 = 1.0, double ratio = 0.0);

/// min over nodes of u - |v|.
double ordering_margin(const fields::ScalarField& u, const fields::ScalarField& v);

/// integral of u against dmu_{g(t)} at stored index `index`.
double mass(const FlowTrajectory& trajectory, std::size_t index);

}  // namespace lyhlab::flow
