#include "lyhlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lyhlab/error.hpp"

namespace lyhlab::fields {
namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

double ScalarField::max_imaginary() const {
  double worst = 0.0;
  for (const Complex& v : values) worst = std::max(worst, std::abs(v.imag()));
  return worst;
}

double ScalarField::max_abs() const {
  double worst = 0.0;
  for (const Complex& v : values) worst = std::max(worst, std::abs(v));
  return worst;
}

double ScalarField::min_real() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const Complex& v : values) lowest = std::min(lowest, v.real());
  return lowest;
}

MatrixField::MatrixField(GridPtr grid, int n)
    : grid_(std::move(grid)),
      n_(n),
      components_(static_cast<std::size_t>(n * n), ComplexArray(grid_->size(), Complex(0.0))) {}

SmallMatrix MatrixField::at(std::size_t node) const {
  SmallMatrix m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = component(i, j)[node];
  return m;
}

void MatrixField::set(std::size_t node, const SmallMatrix& m) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) component(i, j)[node] = m(i, j);
}

double MatrixField::max_abs() const {
  double worst = 0.0;
  for (const auto& c : components_)
    for (const Complex& v : c) worst = std::max(worst, std::abs(v));
  return worst;
}

double HermitianField::hermitian_defect() const {
  double worst = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = i; j < dim(); ++j) {
      const auto& a = component(i, j);
      const auto& b = component(j, i);
      for (std::size_t p = 0; p < a.size(); ++p) {
        worst = std::max(worst, std::abs(a[p] - std::conj(b[p])));
      }
    }
  return worst;
}

double SymmetricField::symmetry_defect() const {
  double worst = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = i + 1; j < dim(); ++j) {
      const auto& a = component(i, j);
      const auto& b = component(j, i);
      for (std::size_t p = 0; p < a.size(); ++p) worst = std::max(worst, std::abs(a[p] - b[p]));
    }
  return worst;
}

GeometrySampler::GeometrySampler(GridPtr grid, geom::MetricState state)
    : grid_(std::move(grid)),
      state_(std::move(state)),
      uniform_(state_.model.kind == geom::ModelKind::FlatTorus) {
  if (uniform_) {
    const ChartPoint origin = ChartPoint::Zero(grid_->dim());
    cached_.g = geom::metric_at(state_, origin);
    cached_.g_inv = cached_.g.inverse();
    cached_.gamma = geom::christoffel_at(state_, origin);
    cached_.curvature = geom::curvature_at(state_, origin);
  } else {
    if (!(state_.a > 0.0) || !std::isfinite(state_.a)) {
      throw InputError("metric scale a must be positive and finite");
    }
    reference_ = &grid_->reference_geometry();
  }
}

NodeGeometry GeometrySampler::at(std::size_t node) const {
  if (uniform_) return cached_;
  // g -> a g leaves Gamma and Ric unchanged and scales R_{i jbar k lbar} by a.
  const double a = state_.a;
  NodeGeometry out = (*reference_)[node];
  out.g *= a;
  out.g_inv /= a;
  for (auto& r : out.curvature.riemann) r *= a;
  out.curvature.scalar /= a;
  return out;
}

ScalarField sample(const GridPtr& grid, const std::function<Complex(const ChartPoint&)>& fn,
                   bool real) {
  ComplexArray values(grid->size());
  for (std::size_t p = 0; p < grid->size(); ++p) values[p] = fn(grid->point(p));
  return ScalarField(grid, std::move(values), real);
}

ScalarField constant_field(const GridPtr& grid, Complex value) {
  return ScalarField(grid, ComplexArray(grid->size(), value), value.imag() == 0.0);
}

HermitianField metric_field(const GridPtr& grid, const geom::MetricState& state) {
  HermitianField out(grid, grid->dim());
  GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) out.set(p, geo.at(p).g);
  return out;
}

HermitianField ricci_field(const GridPtr& grid, const geom::MetricState& state) {
  HermitianField out(grid, grid->dim());
  GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) out.set(p, geo.at(p).curvature.ricci);
  return out;
}

ScalarField scalar_curvature_field(const GridPtr& grid, const geom::MetricState& state) {
  ComplexArray values(grid->size());
  GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) values[p] = geo.at(p).curvature.scalar;
  return ScalarField(grid, std::move(values));
}

Partials partials(const ScalarField& f) {
  if (!f.grid) throw InputError("field has no grid");
  return f.grid->partials(f.values);
}

HermitianField mixed_hessian(const ScalarField& f) {
  const int n = f.grid->dim();
  SecondPartials second = f.grid->second_partials(f.values);
  HermitianField out(f.grid, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.component(i, j) = std::move(second.mixed[idx(i * n + j)]);
  if (f.real) {
    // d_i d_jbar f is Hermitian for real f; remove rounding asymmetry.
    for (std::size_t p = 0; p < out.size(); ++p) {
      SmallMatrix m = out.at(p);
      out.set(p, 0.5 * (m + m.adjoint()));
    }
  }
  return out;
}

SymmetricField holomorphic_hessian(const ScalarField& f, const geom::MetricState& state) {
  const int n = f.grid->dim();
  const Partials first = f.grid->partials(f.values);
  SecondPartials second = f.grid->second_partials(f.values);
  SymmetricField out(f.grid, n);
  GeometrySampler geo(f.grid, state);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.component(i, j) = std::move(second.holo[idx(i * n + j)]);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const NodeGeometry node = geo.at(p);
    SmallMatrix m = out.at(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) m(i, j) -= node.gamma(k, i, j) * first.holo[idx(k)][p];
    out.set(p, 0.5 * (m + m.transpose()));
  }
  return out;
}

ScalarField laplacian(const ScalarField& f, const geom::MetricState& state) {
  const int n = f.grid->dim();
  const SecondPartials second = f.grid->second_partials(f.values);
  GeometrySampler geo(f.grid, state);
  ComplexArray out(f.size(), Complex(0.0));
  for (std::size_t p = 0; p < f.size(); ++p) {
    const SmallMatrix gi = geo.at(p).g_inv;
    Complex sum = 0.0;
    // g^{i jbar} d_i d_jbar f = tr(G^{-1} M)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sum += gi(j, i) * second.mixed[idx(i * n + j)][p];
    out[p] = sum;
  }
  ScalarField result(f.grid, std::move(out), f.real);
  if (f.real)
    for (auto& v : result.values) v = Complex(v.real(), 0.0);
  return result;
}

namespace {

// On a curved surface every (1,1)-tensor is tau g with g parallel, so its covariant
// derivatives are those of the scalar tau; this avoids chained chart factors at the poles.
bool reduces_to_scalar(const MatrixField& t) {
  return t.dim() == 1 && t.grid()->model().kind != geom::ModelKind::FlatTorus;
}

ScalarField metric_ratio(const MatrixField& t, const GeometrySampler& geo) {
  ComplexArray tau(t.grid()->size());
  for (std::size_t p = 0; p < tau.size(); ++p) tau[p] = t.component(0, 0)[p] / geo.at(p).g(0, 0);
  return ScalarField(t.grid(), std::move(tau), false);
}

}  // namespace

TensorGradient covariant_derivative(const MatrixField& t, const geom::MetricState& state) {
  const int n = t.dim();
  const GridPtr& grid = t.grid();
  TensorGradient out;
  out.holo.assign(idx(n), MatrixField(grid, n));
  out.anti.assign(idx(n), MatrixField(grid, n));
  if (reduces_to_scalar(t)) {
    GeometrySampler geo(grid, state);
    const Partials d = grid->partials(metric_ratio(t, geo).values);
    for (std::size_t p = 0; p < grid->size(); ++p) {
      const Complex g = geo.at(p).g(0, 0);
      out.holo[0].component(0, 0)[p] = g * d.holo[0][p];
      out.anti[0].component(0, 0)[p] = g * d.anti[0][p];
    }
    return out;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Partials d = grid->partials(t.component(i, j));
      for (int k = 0; k < n; ++k) {
        out.holo[idx(k)].component(i, j) = std::move(d.holo[idx(k)]);
        out.anti[idx(k)].component(i, j) = std::move(d.anti[idx(k)]);
      }
    }
  if (grid->model().kind == geom::ModelKind::FlatTorus) return out;
  GeometrySampler geo(grid, state);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const geom::Christoffel gamma = geo.at(p).gamma;
    const SmallMatrix tp = t.at(p);
    for (int k = 0; k < n; ++k) {
      SmallMatrix h = out.holo[idx(k)].at(p);
      SmallMatrix a = out.anti[idx(k)].at(p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int q = 0; q < n; ++q) {
            // nabla_k T_{i jbar} = d_k T - Gamma^q_{k i} T_{q jbar}
            h(i, j) -= gamma(q, k, i) * tp(q, j);
            // nabla_kbar T_{i jbar} = d_kbar T - conj(Gamma^q_{k j}) T_{i qbar}
            a(i, j) -= std::conj(gamma(q, k, j)) * tp(i, q);
          }
      out.holo[idx(k)].set(p, h);
      out.anti[idx(k)].set(p, a);
    }
  }
  return out;
}

HermitianField tensor_laplacian(const MatrixField& t, const geom::MetricState& state) {
  const int n = t.dim();
  const GridPtr& grid = t.grid();
  if (reduces_to_scalar(t)) {
    GeometrySampler geo(grid, state);
    const ScalarField lap = laplacian(metric_ratio(t, geo), state);
    HermitianField out(grid, 1);
    for (std::size_t p = 0; p < grid->size(); ++p)
      out.component(0, 0)[p] = geo.at(p).g(0, 0) * lap.values[p];
    return out;
  }
  const TensorGradient first = covariant_derivative(t, state);
  const bool flat = grid->model().kind == geom::ModelKind::FlatTorus;
  GeometrySampler geo(grid, state);

  // second[k][l] = nabla_lbar nabla_k T + nabla_k nabla_lbar T, before contraction.
  std::vector<MatrixField> sum(idx(n * n), MatrixField(grid, n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Partials du = grid->partials(first.holo[idx(k)].component(i, j));  // d of nabla_k T
        const Partials dv = grid->partials(first.anti[idx(k)].component(i, j));  // d of nabla_kbar T
        for (int l = 0; l < n; ++l) {
          // (k, l): d_lbar (nabla_k T) + d_k (nabla_lbar T); the latter uses anti[l], handled below.
          auto& target = sum[idx(k * n + l)].component(i, j);
          for (std::size_t p = 0; p < target.size(); ++p) target[p] += du.anti[idx(l)][p];
          auto& mirror = sum[idx(l * n + k)].component(i, j);
          for (std::size_t p = 0; p < mirror.size(); ++p) mirror[p] += dv.holo[idx(l)][p];
        }
      }
  }

  HermitianField out(grid, n);
  for (std::size_t p = 0; p < grid->size(); ++p) {
    const NodeGeometry node = geo.at(p);
    SmallMatrix acc = SmallMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        SmallMatrix term = sum[idx(k * n + l)].at(p);
        if (!flat) {
          const SmallMatrix u = first.holo[idx(k)].at(p);  // nabla_k T
          const SmallMatrix v = first.anti[idx(l)].at(p);  // nabla_lbar T
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int q = 0; q < n; ++q) {
                // nabla_lbar (nabla_k T)_{i jbar}: correction on jbar only.
                term(i, j) -= std::conj(node.gamma(q, l, j)) * u(i, q);
                // nabla_k (nabla_lbar T)_{i jbar}: correction on i only.
                term(i, j) -= node.gamma(q, k, i) * v(q, j);
              }
        }
        // g^{k lbar} = (G^{-1})_{l k}
        acc += 0.5 * node.g_inv(l, k) * term;
      }
    out.set(p, acc);
  }
  return out;
}

double integrate(const ScalarField& f, const geom::MetricState& state) {
  if (!f.grid) throw InputError("field has no grid");
  GeometrySampler geo(f.grid, state);
  double sum = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    const double density = geo.at(p).g.determinant().real();
    sum += f.grid->chart_weight(p) * density * f.values[p].real();
  }
  return sum;
}

namespace {

double central_spacing(std::span<const double, 3> times) {
  const double lo = times[1] - times[0];
  const double hi = times[2] - times[1];
  if (!(lo > 0.0) || !(hi > 0.0) || std::abs(lo - hi) > 1e-9 * std::max(lo, hi)) {
    throw InputError("fd_time_derivative: snapshots must be equally spaced and increasing");
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScalarField fd_time_derivative(std::span<const ScalarField, 3> s, std::span<const double, 3> times) {
  const double dt = central_spacing(times);
  require_same_grid(s[0].grid, s[1].grid);
  require_same_grid(s[0].grid, s[2].grid);
  ComplexArray out(s[0].size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = (s[2][p] - s[0][p]) / (2.0 * dt);
  return ScalarField(s[0].grid, std::move(out), s[0].real && s[2].real);
}

MatrixField fd_time_derivative(std::span<const MatrixField, 3> s, std::span<const double, 3> times) {
  const double dt = central_spacing(times);
  require_same_grid(s[0].grid(), s[1].grid());
  require_same_grid(s[0].grid(), s[2].grid());
  if (s[0].dim() != s[2].dim()) throw InputError("fd_time_derivative: tensor rank mismatch");
  return (1.0 / (2.0 * dt)) * (s[2] - s[0]);
}

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) throw InputError("field has no grid");
  if (a != b && !(a->model() == b->model())) throw InputError("fields live on different grids");
}

MatrixField operator+(const MatrixField& a, const MatrixField& b) {
  require_same_grid(a.grid(), b.grid());
  MatrixField out = a;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      auto& c = out.component(i, j);
      const auto& d = b.component(i, j);
      for (std::size_t p = 0; p < c.size(); ++p) c[p] += d[p];
    }
  return out;
}

MatrixField operator-(const MatrixField& a, const MatrixField& b) {
  require_same_grid(a.grid(), b.grid());
  MatrixField out = a;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      auto& c = out.component(i, j);
      const auto& d = b.component(i, j);
      for (std::size_t p = 0; p < c.size(); ++p) c[p] -= d[p];
    }
  return out;
}

MatrixField operator*(double s, const MatrixField& a) {
  MatrixField out = a;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      for (auto& v : out.component(i, j)) v *= s;
  return out;
}

double max_difference(const MatrixField& a, const MatrixField& b) {
  require_same_grid(a.grid(), b.grid());
  double worst = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      const auto& c = a.component(i, j);
      const auto& d = b.component(i, j);
      for (std::size_t p = 0; p < c.size(); ++p) worst = std::max(worst, std::abs(c[p] - d[p]));
    }
  return worst;
}

}  // namespace lyhlab::fields
