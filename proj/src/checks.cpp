#include "lyhlab/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lyhlab/error.hpp"
#include "lyhlab/lyh.hpp"
#include "lyhlab/tensor.hpp"

namespace lyhlab::checks {
namespace {

using fields::GridPtr;
using fields::HermitianField;
using fields::MatrixField;
using fields::ScalarField;

SmallVector column(const std::vector<ComplexArray>& parts, std::size_t node) {
  SmallVector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) v[static_cast<Eigen::Index>(k)] = parts[k][node];
  return v;
}

MatrixField as_matrix(const ScalarField& f) {
  MatrixField m(f.grid, 1);
  m.component(0, 0) = f.values;
  return m;
}

std::array<flow::FlowSnapshot, 3> probe(const flow::FlowTrajectory& trajectory, double t,
                                        double dt) {
  if (!(dt > 0.0)) throw InputError("probe spacing dt must be positive");
  if (!(t - dt > 0.0)) {
    std::ostringstream msg;
    msg << "no snapshot at t - dt = " << t - dt << " (must be > 0)";
    throw InputError(msg.str());
  }
  return {trajectory.evaluate(t - dt), trajectory.evaluate(t), trajectory.evaluate(t + dt)};
}

std::array<double, 3> probe_times(double t, double dt) { return {t - dt, t, t + dt}; }

/// Residual lhs - sum(terms) over all nodes and components.
IdentityResidual compare(const std::string& id, double t, double dt, double epsilon,
                         const MatrixField& lhs, const std::vector<MatrixField>& terms,
                         const IdentityTolerance& tol) {
  IdentityResidual r;
  r.identity_id = id;
  r.t = t;
  r.dt = dt;
  r.epsilon = epsilon;
  r.grid = lhs.grid()->resolution();
  r.scale = lhs.max_abs();
  for (const auto& term : terms) r.scale = std::max(r.scale, term.max_abs());
  const int n = lhs.dim();
  for (std::size_t p = 0; p < lhs.size(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Complex diff = lhs.component(i, j)[p];
        for (const auto& term : terms) diff -= term.component(i, j)[p];
        if (std::abs(diff) > r.abs_residual) {
          r.abs_residual = std::abs(diff);
          r.worst_node = p;
        }
      }
  }
  r.rel_residual = r.scale > 0.0 ? r.abs_residual / r.scale : r.abs_residual;
  r.threshold = tol.threshold(dt);
  r.passed = std::isfinite(r.rel_residual) && r.rel_residual <= r.threshold;
  return r;
}

/// g^{k lbar} (d_k nabla_lbar T + db_l nabla_k T).
MatrixField transport(const fields::TensorGradient& grad, const fields::Partials& dl,
                      const geom::MetricState& state) {
  const GridPtr& grid = grad.holo.front().grid();
  const int n = grid->dim();
  MatrixField out(grid, n);
  const fields::GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const SmallMatrix gi = geo.at(p).g_inv;
    SmallMatrix acc = SmallMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        const auto kk = static_cast<std::size_t>(k);
        const auto ll = static_cast<std::size_t>(l);
        acc += gi(l, k) * (dl.holo[kk][p] * grad.anti[ll].at(p) + dl.anti[ll][p] * grad.holo[kk].at(p));
      }
    out.set(p, acc);
  }
  return out;
}

/// Delta Ric + R * Ric - Ric G^{-1} Ric as three separate fields.
std::vector<MatrixField> ricci_identity_terms(const GridPtr& grid, const geom::MetricState& state,
                                              double weight) {
  const HermitianField ric = fields::ricci_field(grid, state);
  const int n = grid->dim();
  MatrixField lap = weight * fields::tensor_laplacian(ric, state);
  MatrixField curv(grid, n);
  MatrixField square(grid, n);
  const fields::GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    const SmallMatrix r = ric.at(p);
    curv.set(p, weight * tensor::contract(node.curvature, node.g_inv, r));
    square.set(p, -weight * tensor::product(r, node.g_inv, r));
  }
  return {lap, curv, square};
}

}  // namespace

double IdentityTolerance::threshold(double dt) const { return std::max(floor, slope * dt * dt); }

IdentityResidual check_L_evolution(const flow::FlowTrajectory& trajectory, double t, double dt,
                                   const IdentityTolerance& tol) {
  const auto snaps = probe(trajectory, t, dt);
  const std::array<ScalarField, 3> L = {lyh::log_density(snaps[0].u), lyh::log_density(snaps[1].u),
                                        lyh::log_density(snaps[2].u)};
  const auto times = probe_times(t, dt);
  const ScalarField lhs = fields::fd_time_derivative(std::span<const ScalarField, 3>(L),
                                                     std::span<const double, 3>(times));
  const geom::MetricState& state = snaps[1].state;
  const ScalarField& l = L[1];
  const ScalarField lap = fields::laplacian(l, state);
  const fields::Partials dl = fields::partials(l);
  const fields::GeometrySampler geo(l.grid, state);
  ComplexArray grad_sq(l.size());
  ComplexArray scalar(l.size());
  for (std::size_t p = 0; p < l.size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    grad_sq[p] = tensor::pairing(node.g_inv, column(dl.holo, p), column(dl.anti, p));
    scalar[p] = trajectory.epsilon() * node.curvature.scalar;
  }
  return compare("L_evolution", t, dt, trajectory.epsilon(), as_matrix(lhs),
                 {as_matrix(lap), as_matrix(ScalarField(l.grid, std::move(grad_sq))),
                  as_matrix(ScalarField(l.grid, std::move(scalar)))},
                 tol);
}

IdentityResidual check_lemma1(const flow::FlowTrajectory& trajectory, double t, double dt,
                              const IdentityTolerance& tol) {
  const auto snaps = probe(trajectory, t, dt);
  std::array<MatrixField, 3> hess;
  ScalarField l;
  for (std::size_t k = 0; k < 3; ++k) {
    ScalarField lk = lyh::log_density(snaps[k].u);
    hess[k] = fields::mixed_hessian(lk);
    if (k == 1) l = std::move(lk);
  }
  const auto times = probe_times(t, dt);
  const MatrixField lhs = fields::fd_time_derivative(std::span<const MatrixField, 3>(hess),
                                                     std::span<const double, 3>(times));

  const double eps = trajectory.epsilon();
  const geom::MetricState& state = snaps[1].state;
  const GridPtr& grid = l.grid;
  const int n = grid->dim();
  const MatrixField& h = hess[1];
  const fields::Partials dl = fields::partials(l);
  const fields::SymmetricField s = fields::holomorphic_hessian(l, state);
  const HermitianField ric = fields::ricci_field(grid, state);

  MatrixField lap = fields::tensor_laplacian(h, state);
  MatrixField flow_term = transport(fields::covariant_derivative(h, state), dl, state);
  MatrixField curv_h(grid, n), curv_grad(grid, n), hh(grid, n), ss(grid, n), ric_half(grid, n);
  const fields::GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    const SmallMatrix& gi = node.g_inv;
    const SmallMatrix hp = h.at(p);
    const SmallMatrix rp = ric.at(p);
    const SmallMatrix grad_sq = column(dl.holo, p) * column(dl.anti, p).transpose();
    curv_h.set(p, tensor::contract(node.curvature, gi, hp));
    curv_grad.set(p, tensor::contract(node.curvature, gi, grad_sq));
    hh.set(p, tensor::product(hp, gi, hp));
    ss.set(p, tensor::holo_square(s.at(p), gi));
    ric_half.set(p, -0.5 * (tensor::product(hp, gi, rp) + tensor::product(rp, gi, hp)));
  }
  std::vector<MatrixField> terms = {lap, flow_term, curv_h, curv_grad, hh, ss, ric_half};
  if (eps != 0.0) {
    for (auto& term : ricci_identity_terms(grid, state, eps)) terms.push_back(std::move(term));
  }
  return compare("lemma1", t, dt, eps, lhs, terms, tol);
}

IdentityResidual check_lemma2(const geom::ManifoldModel& model, double a0, double epsilon,
                              double t, double dt, const IdentityTolerance& tol) {
  model.validate();
  if (!(epsilon >= 0.0)) throw InputError("check_lemma2: epsilon must be >= 0");
  if (!(t - dt >= 0.0)) throw InputError("check_lemma2: probe window starts before t = 0");
  const GridPtr grid = fields::make_grid(model);
  const auto times = probe_times(t, dt);
  std::array<MatrixField, 3> ric;
  geom::MetricState mid;
  for (std::size_t k = 0; k < 3; ++k) {
    geom::MetricState s;
    s.model = model;
    s.a = geom::krf_scale(model, a0, epsilon, times[k]);
    s.t = times[k];
    s.epsilon = epsilon;
    ric[k] = epsilon * fields::ricci_field(grid, s);
    if (k == 1) mid = s;
  }
  const MatrixField lhs = fields::fd_time_derivative(std::span<const MatrixField, 3>(ric),
                                                     std::span<const double, 3>(times));
  return compare("lemma2", t, dt, epsilon, lhs, ricci_identity_terms(grid, mid, epsilon * epsilon),
                 tol);
}

IdentityResidual check_lemma3(const flow::FlowTrajectory& trajectory, double t, double dt,
                              const IdentityTolerance& tol) {
  const auto snaps = probe(trajectory, t, dt);
  std::array<MatrixField, 3> cons;
  for (std::size_t k = 0; k < 3; ++k) {
    cons[k] = lyh::constraint_tensor(lyh::quotient(snaps[k].u, snaps[k].v));
  }
  const auto times = probe_times(t, dt);
  const MatrixField lhs = fields::fd_time_derivative(std::span<const MatrixField, 3>(cons),
                                                     std::span<const double, 3>(times));

  const geom::MetricState& state = snaps[1].state;
  const ScalarField l = lyh::log_density(snaps[1].u);
  const ScalarField h = lyh::quotient(snaps[1].u, snaps[1].v);
  const GridPtr& grid = l.grid;
  const int n = grid->dim();
  const MatrixField& c = cons[1];
  const fields::Partials dl = fields::partials(l);
  const fields::Partials dh = fields::partials(h);
  const fields::SymmetricField sl = fields::holomorphic_hessian(l, state);
  const fields::HermitianField hl = fields::mixed_hessian(l);
  const fields::SymmetricField sh = fields::holomorphic_hessian(h, state);
  const fields::HermitianField hh = fields::mixed_hessian(h);
  const HermitianField ric = fields::ricci_field(grid, state);

  MatrixField lap = fields::tensor_laplacian(c, state);
  MatrixField flow_term = transport(fields::covariant_derivative(c, state), dl, state);
  MatrixField holo_prod(grid, n), mixed_prod(grid, n), coupling(grid, n), ric_half(grid, n),
      gradient(grid, n);
  const fields::GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    const SmallMatrix& gi = node.g_inv;
    const double hv = h[p].real();
    const double phi = 1.0 / (1.0 - hv * hv);
    const double coef = 2.0 * hv * phi;
    const SmallVector d = column(dh.holo, p);
    const SmallVector db = column(dh.anti, p);
    const SmallMatrix a = sh.at(p) + coef * d * d.transpose();
    const SmallMatrix b = hh.at(p) + coef * d * db.transpose();
    holo_prod.set(p, -phi * tensor::holo_square(a, gi));
    mixed_prod.set(p, -phi * tensor::product(b, gi, b));

    const SmallMatrix slp = sl.at(p);
    const SmallMatrix hlp = hl.at(p);
    const SmallMatrix rp = ric.at(p);
    SmallMatrix cp = (slp * gi.transpose() * db) * db.transpose();
    cp += (hlp * gi * d) * db.transpose();
    cp += d * (db.transpose() * gi * hlp);
    cp += d * (slp.conjugate() * gi * d).transpose();
    coupling.set(p, phi * cp);
    ric_half.set(p, -0.5 * phi * ((rp * gi * d) * db.transpose() + d * (db.transpose() * gi * rp)));
    const Complex grad_sq = tensor::pairing(gi, d, db);
    gradient.set(p, -2.0 * phi * phi * grad_sq * d * db.transpose());
  }
  return compare("lemma3", t, dt, trajectory.epsilon(), lhs,
                 {lap, flow_term, holo_prod, mixed_prod, coupling, ric_half, gradient}, tol);
}

IdentityResidual check_ricci_formula(const geom::ManifoldModel& model, double a,
                                     const IdentityTolerance& tol) {
  model.validate();
  const GridPtr grid = fields::make_grid(model);
  geom::MetricState state;
  state.model = model;
  state.a = a;
  const MatrixField lhs = fields::mixed_hessian(fields::scalar_curvature_field(grid, state));
  return compare("ricci_formula", 0.0, 0.0, 0.0, lhs, ricci_identity_terms(grid, state, 1.0), tol);
}

IdentityResidual check_q_evolution_inequality(const flow::FlowTrajectory& trajectory, double t,
                                              double dt, double tolerance) {
  const auto snaps = probe(trajectory, t, dt);
  const double eps = trajectory.epsilon();
  const auto times = probe_times(t, dt);
  // The g / t part of Q is differentiated in closed form; only the remainder is differenced.
  std::array<MatrixField, 3> smooth;
  MatrixField qm;
  for (std::size_t k = 0; k < 3; ++k) {
    MatrixField qk = lyh::assemble(snaps[k], eps).Q;
    smooth[k] = qk - (1.0 / times[k]) * fields::metric_field(qk.grid(), snaps[k].state);
    if (k == 1) qm = std::move(qk);
  }
  const geom::MetricState& state = snaps[1].state;
  const double a_rate = -geom::einstein_constant(trajectory.model()) * eps;
  const MatrixField lhs =
      fields::fd_time_derivative(std::span<const MatrixField, 3>(smooth),
                                 std::span<const double, 3>(times)) +
      (a_rate / (state.a * t) - 1.0 / (t * t)) * fields::metric_field(qm.grid(), state);

  const GridPtr& grid = qm.grid();
  const ScalarField l = lyh::log_density(snaps[1].u);
  const fields::Partials dl = fields::partials(l);
  const HermitianField ric = fields::ricci_field(grid, state);
  const MatrixField lap = fields::tensor_laplacian(qm, state);
  const MatrixField flow_term = transport(fields::covariant_derivative(qm, state), dl, state);

  IdentityResidual r;
  r.identity_id = "q_inequality";
  r.t = t;
  r.dt = dt;
  r.epsilon = eps;
  r.grid = grid->resolution();
  r.threshold = tolerance;
  double lowest = std::numeric_limits<double>::infinity();
  const fields::GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const fields::NodeGeometry node = geo.at(p);
    const SmallMatrix& gi = node.g_inv;
    const SmallMatrix qp = qm.at(p);
    const SmallMatrix rp = ric.at(p);
    const SmallMatrix reaction = tensor::contract(node.curvature, gi, qp) -
                                 (0.5 + eps) * (tensor::product(rp, gi, qp) + tensor::product(qp, gi, rp)) +
                                 tensor::product(qp - 2.0 / t * node.g, gi, qp);
    const SmallMatrix rhs = lap.at(p) + flow_term.at(p) + reaction;
    const SmallMatrix lp = lhs.at(p);
    r.scale = std::max({r.scale, lp.cwiseAbs().maxCoeff(), lap.at(p).cwiseAbs().maxCoeff(),
                        flow_term.at(p).cwiseAbs().maxCoeff(), reaction.cwiseAbs().maxCoeff()});
    SmallMatrix dmat = lp - rhs;
    dmat = 0.5 * (dmat + dmat.adjoint());
    const double value = tensor::pencil_min_eigenvalue(dmat, node.g);
    if (value < lowest) {
      lowest = value;
      r.worst_node = p;
    }
  }
  r.abs_residual = std::max(0.0, -lowest);
  r.rel_residual = r.scale > 0.0 ? r.abs_residual / r.scale : r.abs_residual;
  r.passed = std::isfinite(lowest) && lowest >= -tolerance;
  return r;
}

double fit_convergence_order(const std::vector<double>& dts, const std::vector<double>& residuals) {
  if (dts.size() != residuals.size() || dts.size() < 2) {
    throw InputError("fit_convergence_order: need at least two (dt, residual) pairs");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(dts.size());
  for (std::size_t k = 0; k < dts.size(); ++k) {
    if (!(dts[k] > 0.0) || !(residuals[k] > 0.0)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const double x = std::log(dts[k]);
    const double y = std::log(residuals[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

SuiteResult run_identity_suite(const std::vector<const flow::FlowTrajectory*>& trajectories,
                               const SuiteOptions& options) {
  SuiteResult out;
  auto record = [&](IdentityResidual r) {
    if (!r.passed && out.passed) {
      out.passed = false;
      std::ostringstream msg;
      msg << r.identity_id << " at t = " << r.t << ", dt = " << r.dt << ": rel residual "
          << r.rel_residual << " exceeds " << r.threshold;
      out.failure = msg.str();
    }
    out.residuals.push_back(std::move(r));
  };

  for (std::size_t index = 0; index < trajectories.size(); ++index) {
    const flow::FlowTrajectory& traj = *trajectories[index];
    for (double t : options.times) {
      std::map<std::string, std::vector<double>> series;
      for (double dt : options.dts) {
        try {
          std::vector<IdentityResidual> batch = {
              check_L_evolution(traj, t, dt, options.tolerance),
              check_lemma1(traj, t, dt, options.tolerance),
              check_lemma3(traj, t, dt, options.tolerance),
              check_q_evolution_inequality(traj, t, dt, options.inequality_tolerance)};
          for (auto& r : batch) {
            if (r.identity_id != "q_inequality") series[r.identity_id].push_back(r.abs_residual);
            record(std::move(r));
          }
        } catch (const Error& e) {
          std::ostringstream msg;
          msg << "identity suite (trajectory " << index << ", t = " << t << ", dt = " << dt
              << "): " << e.what();
          throw Error(msg.str());
        }
      }
      if (options.dts.size() >= 2) {
        const auto largest = std::max_element(options.dts.begin(), options.dts.end());
        const auto at_largest = static_cast<std::size_t>(largest - options.dts.begin());
        for (const auto& [id, values] : series) {
          ConvergenceFit fit;
          fit.identity_id = id;
          fit.trajectory = index;
          fit.t = t;
          fit.resolved = values[at_largest] > options.order_floor;
          if (fit.resolved) {
            fit.order = fit_convergence_order(options.dts, values);
            fit.passed = fit.order >= options.order_min && fit.order <= options.order_max;
            if (!fit.passed && out.passed) {
              out.passed = false;
              std::ostringstream msg;
              msg << id << " at t = " << t << ": fitted order " << fit.order << " outside ["
                  << options.order_min << ", " << options.order_max << "]";
              out.failure = msg.str();
            }
          }
          out.fits.push_back(fit);
        }
      }
    }
    if (traj.model().kind == geom::ModelKind::FubiniStudyCP1) {
      for (double t : options.times) {
        record(check_lemma2(traj.model(), traj.a0(), traj.epsilon(), t, options.dts.back(),
                            options.tolerance));
      }
      geom::MetricState s = traj.states().front();
      record(check_ricci_formula(traj.model(), s.a, options.tolerance));
    }
  }
  return out;
}

}  // namespace lyhlab::checks
