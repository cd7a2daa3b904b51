#pragma once

// Evolution identities verified against central time differences of re-evolved pairs.

#include <string>
#include <vector>

#include "lyhlab/flow.hpp"

namespace lyhlab::checks {

struct IdentityResidual {
  std::string identity_id;
  double t = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  int grid = 0;
  double dt = 0.0;
  double epsilon = 0.0;
  /// Normalizer of rel_residual: max of |LHS| and every right-hand term.
  double scale = 0.0;
  std::size_t worst_node = 0;
  double threshold = 0.0;
  bool passed = false;
};

/// Pass rule shared by every identity: rel <= max(floor, slope * dt^2). The default slope
/// carries the floor at dt = 1e-4 quadratically to coarser probes.
struct IdentityTolerance {
  double floor = 1e-5;
  double slope = 1e3;
  double threshold(double dt) const;
};

/// dL/dt = Delta L + |grad L|^2 + eps R.
IdentityResidual check_L_evolution(const flow::FlowTrajectory& trajectory, double t, double dt,
                                   const IdentityTolerance& tol = {});
/// Evolution of the mixed Hessian of L.
IdentityResidual check_lemma1(const flow::FlowTrajectory& trajectory, double t, double dt,
                              const IdentityTolerance& tol = {});
/// d/dt (eps Ric) = eps^2 (Delta Ric + R * Ric - Ric^2).
IdentityResidual check_lemma2(const geom::ManifoldModel& model, double a0, double epsilon,
                              double t, double dt, const IdentityTolerance& tol = {});
/// Evolution of the constraint tensor grad h gradbar h / (1 - h^2).
IdentityResidual check_lemma3(const flow::FlowTrajectory& trajectory, double t, double dt,
                              const IdentityTolerance& tol = {});
/// nabla_i nabla_jbar R = Delta R_{i jbar} + R * Ric - Ric^2 at scale a.
IdentityResidual check_ricci_formula(const geom::ManifoldModel& model, double a,
                                     const IdentityTolerance& tol = {});
/// D = dQ/dt - RHS must be nonnegative; abs_residual = max(0, -min eigenvalue of D) and
/// passed iff that is <= `tolerance`.
IdentityResidual check_q_evolution_inequality(const flow::FlowTrajectory& trajectory, double t,
                                              double dt, double tolerance = 1e-4);

/// Least-squares slope of log(residual) against log(dt).
double fit_convergence_order(const std::vector<double>& dts, const std::vector<double>& residuals);

struct SuiteOptions {
  std::vector<double> times{0.1};
  std::vector<double> dts{4e-4, 2e-4, 1e-4};
  IdentityTolerance tolerance;
  double inequality_tolerance = 1e-4;
  /// Accepted band for the fitted order.
  double order_min = 1.8;
  double order_max = 2.2;
  /// Fits are skipped when the residual at the largest dt is below this (nothing to converge).
  double order_floor = 1e-11;
};

struct ConvergenceFit {
  std::string identity_id;
  std::size_t trajectory = 0;
  double t = 0.0;
  double order = 0.0;
  bool resolved = false;
  bool passed = true;
};

struct SuiteResult {
  std::vector<IdentityResidual> residuals;
  std::vector<ConvergenceFit> fits;
  bool passed = true;
  /// First failing check, empty when everything passed.
  std::string failure;
};

/// Every scalar and tensor evolution check for each trajectory, time and dt; CP1 trajectories
/// add the Ricci checks. Convergence orders are fitted across dts.
SuiteResult run_identity_suite(const std::vector<const flow::FlowTrajectory*>& trajectories,
                               const SuiteOptions& options);

}  // namespace lyhlab::checks
