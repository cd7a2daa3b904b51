#include "lyhlab/lyh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>


#include "lyhlab/error.hpp"
#include "lyhlab/generators.hpp"
#include "lyhlab/tensor.hpp"

namespace lyhlab {

namespace tensor {

double hermitian_min_eigenvalue(const SmallMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double b = std::abs(0.5 * (m(0, 1) + std::conj(m(1, 0))));
  return 0.5 * (a + d) - std::hypot(0.5 * (a - d), b);
}

double pencil_min_eigenvalue(const SmallMatrix& m, const SmallMatrix& g) {
  if (m.rows() == 1) return m(0, 0).real() / g(0, 0).real();
  // g = L L^H; eigenvalues of L^{-1} m L^{-H}.
  const SmallMatrix l = g.llt().matrixL();
  const SmallMatrix li = l.inverse();
  return hermitian_min_eigenvalue(li * m * li.adjoint());
}

}  // namespace tensor

namespace lyh {
namespace {

using fields::HermitianField;
using fields::ScalarField;

constexpr double kHermitianTolerance = 1e-10;

void require_hermitian(const SmallMatrix& m, std::size_t node) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance * scale) {
    std::ostringstream msg;
    msg << "min_eigenvalue: matrix at node " << node << " is not Hermitian";
    throw ConsistencyError(msg.str());
  }
}

SmallVector column(const std::vector<ComplexArray>& parts, std::size_t node) {
  SmallVector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) v[static_cast<Eigen::Index>(k)] = parts[k][node];
  return v;
}

}  // namespace

ScalarField log_density(const ScalarField& u) {
  ComplexArray out(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double value = u[p].real();
    if (!(value > 0.0)) {
      std::ostringstream msg;
      msg << "log_density: u = " << value << " is not positive at node " << p;
      throw DomainError(msg.str());
    }
    out[p] = std::log(value);
  }
  return ScalarField(u.grid, std::move(out));
}

ScalarField quotient(const ScalarField& u, const ScalarField& v) {
  fields::require_same_grid(u.grid, v.grid);
  ComplexArray out(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double uu = u[p].real();
    const double vv = v[p].real();
    if (!(uu > 0.0) || !(std::abs(vv) < uu)) {
      std::ostringstream msg;
      msg << "quotient: |v| < u fails at node " << p << " (u = " << uu << ", v = " << vv << ")";
      throw DomainError(msg.str());
    }
    out[p] = vv / uu;
  }
  return ScalarField(u.grid, std::move(out));
}

HermitianField constraint_tensor(const ScalarField& h) {
  return constraint_tensor(h, fields::partials(h));
}

HermitianField constraint_tensor(const ScalarField& h, const fields::Partials& dh) {
  const int n = h.grid->dim();
  HermitianField out(h.grid, n);
  for (std::size_t p = 0; p < h.size(); ++p) {
    const double hv = h[p].real();
    if (!(std::abs(hv) < 1.0)) {
      std::ostringstream msg;
      msg << "constraint_tensor: |h| = " << std::abs(hv) << " >= 1 at node " << p;
      throw DomainError(msg.str());
    }
    const double phi = 1.0 / (1.0 - hv * hv);
    const SmallVector d = column(dh.holo, p);
    SmallMatrix c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = phi * d[i] * std::conj(d[j]);
    out.set(p, c);
  }
  return out;
}

HermitianField compute_P(const HermitianField& hess_L, const HermitianField& ricci,
                         const HermitianField& constraint, double epsilon) {
  fields::require_same_grid(hess_L.grid(), ricci.grid());
  fields::require_same_grid(hess_L.grid(), constraint.grid());
  HermitianField out(hess_L.grid(), hess_L.dim());
  static_cast<fields::MatrixField&>(out) = hess_L + epsilon * ricci - constraint;
  return out;
}

HermitianField compute_Q(const HermitianField& P, const geom::MetricState& state, double t) {
  if (!(t > 0.0)) throw InputError("compute_Q: t must be positive");
  const HermitianField g = fields::metric_field(P.grid(), state);
  HermitianField out(P.grid(), P.dim());
  static_cast<fields::MatrixField&>(out) = P + (1.0 / t) * g;
  return out;
}

LYHSnapshot assemble(const flow::FlowSnapshot& snap, double epsilon) {
  LYHSnapshot s;
  s.t = snap.t;
  s.epsilon = epsilon;
  s.state = snap.state;
  s.L = log_density(snap.u);
  s.h = quotient(snap.u, snap.v);
  s.grad_L = fields::partials(s.L);
  s.grad_h = fields::partials(s.h);
  s.hess_L = fields::mixed_hessian(s.L);
  s.holo_hess_L = fields::holomorphic_hessian(s.L, s.state);
  s.metric = fields::metric_field(snap.u.grid, s.state);
  s.ricci = fields::ricci_field(snap.u.grid, s.state);
  s.constraint = constraint_tensor(s.h, s.grad_h);
  s.P = compute_P(s.hess_L, s.ricci, s.constraint, epsilon);
  s.Q = compute_Q(s.P, s.state, s.t);
  HermitianField zero(snap.u.grid, snap.u.grid->dim());
  const HermitianField p_free = compute_P(s.hess_L, s.ricci, zero, epsilon);
  s.Q_unconstrained = compute_Q(p_free, s.state, s.t);
  return s;
}

HermitianField compute_Y(const LYHSnapshot& s, double epsilon, double t) {
  if (!(epsilon > 0.0)) throw InputError("compute_Y: Y is undefined for epsilon = 0");
  if (!(t > 0.0)) throw InputError("compute_Y: t must be positive");
  const auto& grid = s.ricci.grid();
  const int n = grid->dim();
  const HermitianField lap = fields::tensor_laplacian(s.ricci, s.state);
  const fields::TensorGradient dric = fields::covariant_derivative(s.ricci, s.state);
  const fields::GeometrySampler geo(grid, s.state);

  HermitianField out(grid, n);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    const SmallMatrix& gi = node.g_inv;
    const SmallMatrix ric = s.ricci.at(p);
    const SmallVector d = column(s.grad_L.holo, p);
    const SmallVector db = column(s.grad_L.anti, p);

    SmallMatrix transport = SmallMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        transport += gi(l, k) * (db[l] * dric.holo[static_cast<std::size_t>(k)].at(p) +
                                 d[k] * dric.anti[static_cast<std::size_t>(l)].at(p));
      }
    const SmallMatrix grad_sq = d * db.transpose();
    SmallMatrix y = lap.at(p) + tensor::contract(node.curvature, gi, ric) -
                    transport / epsilon +
                    tensor::contract(node.curvature, gi, grad_sq) / (epsilon * epsilon) +
                    ric / (epsilon * t);
    out.set(p, 0.5 * (y + y.adjoint()));
  }
  return out;
}

ScalarField min_eigenvalue(const fields::MatrixField& field) {
  ComplexArray out(field.size());
  for (std::size_t p = 0; p < field.size(); ++p) {
    const SmallMatrix m = field.at(p);
    require_hermitian(m, p);
    out[p] = tensor::hermitian_min_eigenvalue(m);
  }
  return ScalarField(field.grid(), std::move(out));
}

ScalarField min_eigenvalue(const fields::MatrixField& field, const fields::MatrixField& metric) {
  fields::require_same_grid(field.grid(), metric.grid());
  ComplexArray out(field.size());
  for (std::size_t p = 0; p < field.size(); ++p) {
    const SmallMatrix m = field.at(p);
    require_hermitian(m, p);
    out[p] = tensor::pencil_min_eigenvalue(m, metric.at(p));
  }
  return ScalarField(field.grid(), std::move(out));
}

namespace {

double scan_minimum(const ScalarField& values, const std::string& quantity, double t,
                    double tolerance, std::size_t limit, std::vector<Violation>* violations,
                    std::size_t* count) {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < values.size(); ++p) {
    const double v = values[p].real();
    lowest = std::min(lowest, v);
    if (v < -tolerance) {
      if (count) ++*count;
      if (violations && violations->size() < limit) violations->push_back({quantity, t, p, v});
    }
  }
  return lowest;
}

}  // namespace

ReportRow summarize(const LYHSnapshot& s, const flow::FlowSnapshot& pair,
                    const ReportOptions& options, std::vector<Violation>* violations,
                    std::size_t* violation_count) {
  ReportRow row;
  row.t = s.t;
  row.min_q = scan_minimum(min_eigenvalue(s.Q, s.metric), "Q", s.t, options.tolerance,
                           options.max_violations, violations, violation_count);
  row.min_q_unconstrained =
      scan_minimum(min_eigenvalue(s.Q_unconstrained, s.metric), "Q_unconstrained", s.t,
                   std::numeric_limits<double>::infinity(), 0, nullptr, nullptr);
  if (options.include_y && s.epsilon > 0.0 &&
      s.state.model.kind != geom::ModelKind::FlatTorus) {
    row.min_y = scan_minimum(min_eigenvalue(compute_Y(s, s.epsilon, s.t), s.metric), "Y", s.t,
                             options.tolerance, options.max_violations, violations,
                             violation_count);
  } else if (options.include_y && s.epsilon > 0.0) {
    row.min_y = 0.0;  // flat: every curvature term vanishes
  }
  row.margin = flow::ordering_margin(pair.u, pair.v);
  row.mass = fields::integrate(pair.u, pair.state);
  const fields::GeometrySampler geo(s.constraint.grid(), s.state);
  for (std::size_t p = 0; p < s.constraint.size(); ++p) {
    const double gap = tensor::trace(geo.at(p).g_inv, s.constraint.at(p)).real();
    row.max_constraint_gap = std::max(row.max_constraint_gap, gap);
  }
  return row;
}

LYHReport report(const flow::FlowTrajectory& trajectory, const ReportOptions& options) {
  LYHReport out;
  out.epsilon = trajectory.epsilon();
  out.tolerance = options.tolerance;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const flow::FlowSnapshot pair = trajectory.snapshot(k);
    if (!(pair.t > 0.0)) continue;  // Q is singular at t = 0
    const LYHSnapshot s = assemble(pair, trajectory.epsilon());
    out.rows.push_back(summarize(s, pair, options, &out.violations, &out.violation_count));
  }
  out.verdict = out.violation_count == 0;
  return out;
}

DecompositionAudit audit_decomposition(const LYHSnapshot& s) {
  DecompositionAudit audit;
  const auto& grid = s.Q.grid();
  const int n = grid->dim();
  const fields::HermitianField hess_h = fields::mixed_hessian(s.h);
  const fields::SymmetricField holo_h = fields::holomorphic_hessian(s.h, s.state);
  const fields::GeometrySampler geo(grid, s.state);
  audit.min_constraint = std::numeric_limits<double>::infinity();
  audit.min_holomorphic_product = std::numeric_limits<double>::infinity();
  audit.min_mixed_product = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    const SmallMatrix& gi = node.g_inv;
    const SmallMatrix expect = s.hess_L.at(p) - s.constraint.at(p) +
                               s.epsilon * s.ricci.at(p) + node.g / s.t;
    audit.algebra_residual =
        std::max(audit.algebra_residual, (s.Q.at(p) - expect).cwiseAbs().maxCoeff());

    const SmallMatrix c = s.constraint.at(p);
    audit.min_constraint =
        std::min(audit.min_constraint, tensor::pencil_min_eigenvalue(c, node.g));
    if (n == 2) {
      // smaller eigenvalue of C relative to g
      const SmallMatrix l = node.g.llt().matrixL();
      const SmallMatrix li = l.inverse();
      const SmallMatrix cn = li * c * li.adjoint();
      audit.constraint_rank_defect =
          std::max(audit.constraint_rank_defect, std::abs(tensor::hermitian_min_eigenvalue(cn)));
    }

    const double hv = s.h[p].real();
    const double phi = 1.0 / (1.0 - hv * hv);
    const double coef = 2.0 * hv * phi;
    const SmallVector d = column(s.grad_h.holo, p);
    const SmallVector db = column(s.grad_h.anti, p);
    const SmallMatrix a = holo_h.at(p) + coef * d * d.transpose();
    const SmallMatrix b = hess_h.at(p) + coef * d * db.transpose();
    const SmallMatrix prod_a = phi * tensor::holo_square(a, gi);
    const SmallMatrix prod_b = phi * b * gi * b;
    audit.min_holomorphic_product = std::min(
        audit.min_holomorphic_product,
        tensor::pencil_min_eigenvalue(0.5 * (prod_a + prod_a.adjoint()), node.g));
    audit.min_mixed_product =
        std::min(audit.min_mixed_product,
                 tensor::pencil_min_eigenvalue(0.5 * (prod_b + prod_b.adjoint()), node.g));
  }
  return audit;
}

double dominance_violation(const LYHSnapshot& s, int vectors_per_node, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = s.Q.dim();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s.Q.size(); ++p) {
    const SmallMatrix diff = s.Q.at(p) - s.Q_unconstrained.at(p);
    for (int r = 0; r < vectors_per_node; ++r) {
      SmallVector w(n);
      for (int i = 0; i < n; ++i) {
        w[i] = Complex(2.0 * fields::unit_uniform(rng()) - 1.0,
                       2.0 * fields::unit_uniform(rng()) - 1.0);
      }
      if (w.norm() == 0.0) w[0] = 1.0;
      w /= w.norm();
      const double value = (w.transpose() * diff * w.conjugate())(0, 0).real();
      worst = std::max(worst, value);
    }
  }
  return worst;
}

}  // namespace lyh
}  // namespace lyhlab
