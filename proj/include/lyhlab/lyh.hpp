#pragma once

// Harnack quantities: L = ln u, h = v / u, the constraint tensor, P, Q, Cao's Y, and
// pointwise positivity certification.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lyhlab/fields.hpp"
#include "lyhlab/flow.hpp"

namespace lyhlab::lyh {

struct LYHSnapshot {
  double t = 0.0;
  double epsilon = 0.0;
  geom::MetricState state;
  fields::ScalarField L;
  fields::ScalarField h;
  fields::Partials grad_L;
  fields::Partials grad_h;
  fields::HermitianField hess_L;
  fields::SymmetricField holo_hess_L;
  fields::HermitianField metric;
  fields::HermitianField ricci;
  fields::HermitianField constraint;
  fields::HermitianField P;
  fields::HermitianField Q;
  fields::HermitianField Q_unconstrained;
};

fields::ScalarField log_density(const fields::ScalarField& u);
fields::ScalarField quotient(const fields::ScalarField& u, const fields::ScalarField& v);
/// d_i h d_jbar h / (1 - h^2).
fields::HermitianField constraint_tensor(const fields::ScalarField& h);
fields::HermitianField constraint_tensor(const fields::ScalarField& h, const fields::Partials& dh);

fields::HermitianField compute_P(const fields::HermitianField& hess_L,
                                 const fields::HermitianField& ricci,
                                 const fields::HermitianField& constraint, double epsilon);
fields::HermitianField compute_Q(const fields::HermitianField& P,
                                 const geom::MetricState& state, double t);

/// Builds every field of the snapshot from the flow pair at time snap.t.
LYHSnapshot assemble(const flow::FlowSnapshot& snap, double epsilon);

/// Y_{i jbar}; requires epsilon > 0 and t > 0.
fields::HermitianField compute_Y(const LYHSnapshot& snapshot, double epsilon, double t);

/// Nodewise smallest eigenvalue of the matrix itself.
fields::ScalarField min_eigenvalue(const fields::MatrixField& field);
/// Nodewise smallest eigenvalue relative to the metric (eigenvalues of g^{-1} T).
fields::ScalarField min_eigenvalue(const fields::MatrixField& field,
                                   const fields::MatrixField& metric);

struct ReportOptions {
  /// Verdict passes when every reported minimum is >= -tolerance.
  double tolerance = 1e-6;
  bool include_y = true;
  std::size_t max_violations = 10;
};

struct ReportRow {
  double t = 0.0;
  double min_q = 0.0;
  double min_q_unconstrained = 0.0;
  std::optional<double> min_y;
  double margin = 0.0;
  double mass = 0.0;
  /// max over nodes of g^{i jbar} C_{i jbar} = |grad h|^2 / (1 - h^2).
  double max_constraint_gap = 0.0;
};

struct Violation {
  std::string quantity;
  double t = 0.0;
  std::size_t node = 0;
  double value = 0.0;
};

struct LYHReport {
  double epsilon = 0.0;
  double tolerance = 0.0;
  std::vector<ReportRow> rows;
  std::vector<Violation> violations;
  std::size_t violation_count = 0;
  bool verdict = true;
};

LYHReport report(const flow::FlowTrajectory& trajectory, const ReportOptions& options = {});

/// Summary of one snapshot row (used by report and by callers that hold a snapshot).
ReportRow summarize(const LYHSnapshot& snapshot, const flow::FlowSnapshot& pair,
                    const ReportOptions& options, std::vector<Violation>* violations,
                    std::size_t* violation_count);

struct DecompositionAudit {
  /// max |Q - (hess L - C + eps Ric + g / t)|.
  double algebra_residual = 0.0;
  /// Smallest eigenvalues of the matrices the positivity argument discards or keeps as PSD.
  double min_constraint = 0.0;
  double min_holomorphic_product = 0.0;
  double min_mixed_product = 0.0;
  /// n = 2: largest second eigenvalue of C (rank <= 1 means it vanishes).
  double constraint_rank_defect = 0.0;
};

DecompositionAudit audit_decomposition(const LYHSnapshot& snapshot);

/// Largest w* (Q - Q_unconstrained) w over `vectors_per_node` random unit w per node.
double dominance_violation(const LYHSnapshot& snapshot, int vectors_per_node, std::uint64_t seed);

}  // namespace lyhlab::lyh
