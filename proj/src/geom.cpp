#include "lyhlab/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lyhlab/error.hpp"

namespace lyhlab::geom {
namespace {

void require_finite(const ChartPoint& point) {
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    if (!std::isfinite(point[i].real()) || !std::isfinite(point[i].imag())) {
      throw InputError("chart point has a non-finite coordinate");
    }
  }
}

void require_point(const MetricState& state, const ChartPoint& point) {
  if (point.size() != state.model.complex_dimension) {
    throw InputError("chart point dimension does not match the model");
  }
  require_finite(point);
  if (!(state.a > 0.0) || !std::isfinite(state.a)) {
    throw InputError("metric scale a must be positive and finite");
  }
}

// 1 + |z|^2 on the stereographic chart.
double conformal_base(const ChartPoint& point) { return 1.0 + std::norm(point[0]); }

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::FlatTorus:
      return "flat_torus";
    case ModelKind::FubiniStudyCP1:
      return "fubini_study_cp1";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "flat_torus" || name == "FlatTorus") return ModelKind::FlatTorus;
  if (name == "fubini_study_cp1" || name == "FubiniStudyCP1" || name == "cp1") {
    return ModelKind::FubiniStudyCP1;
  }
  throw ConfigError("kind: unknown model kind '" + name + "'");
}

void ManifoldModel::validate() const {
  if (grid_resolution < 8 || grid_resolution % 2 != 0) {
    throw ConfigError("resolution: grid_resolution must be even and >= 8");
  }
  switch (kind) {
    case ModelKind::FlatTorus: {
      if (complex_dimension != 1 && complex_dimension != 2) {
        throw ConfigError("complex_dimension: flat torus supports n = 1 or 2");
      }
      if (periods.size() != static_cast<std::size_t>(2 * complex_dimension)) {
        throw ConfigError("periods: expected one period per real axis");
      }
      for (double p : periods) {
        if (!(p > 0.0) || !std::isfinite(p)) {
          throw ConfigError("periods: lattice periods must be strictly positive");
        }
      }
      break;
    }
    case ModelKind::FubiniStudyCP1:
      if (complex_dimension != 1) {
        throw ConfigError("complex_dimension: CP1 has complex dimension 1");
      }
      break;
  }
}

ManifoldModel ManifoldModel::flat_torus(int complex_dimension, std::vector<double> periods,
                                        int grid_resolution) {
  ManifoldModel model;
  model.kind = ModelKind::FlatTorus;
  model.complex_dimension = complex_dimension;
  if (periods.size() == 1 && complex_dimension >= 1) {
    periods.assign(static_cast<std::size_t>(2 * complex_dimension), periods.front());
  }
  model.periods = std::move(periods);
  model.grid_resolution = grid_resolution;
  model.validate();
  return model;
}

ManifoldModel ManifoldModel::fubini_study_cp1(int grid_resolution) {
  ManifoldModel model;
  model.kind = ModelKind::FubiniStudyCP1;
  model.complex_dimension = 1;
  model.grid_resolution = grid_resolution;
  model.validate();
  return model;
}

bool operator==(const ManifoldModel& lhs, const ManifoldModel& rhs) {
  return lhs.kind == rhs.kind && lhs.complex_dimension == rhs.complex_dimension &&
         lhs.periods == rhs.periods && lhs.grid_resolution == rhs.grid_resolution;
}

double einstein_constant(const ManifoldModel& model) {
  return model.kind == ModelKind::FubiniStudyCP1 ? 2.0 : 0.0;
}

double extinction_time(const ManifoldModel& model, double a0, double epsilon) {
  const double rate = einstein_constant(model) * epsilon;
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return a0 / rate;
}

SmallMatrix metric_at(const MetricState& state, const ChartPoint& point) {
  require_point(state, point);
  const int n = state.model.complex_dimension;
  SmallMatrix g = SmallMatrix::Zero(n, n);
  switch (state.model.kind) {
    case ModelKind::FlatTorus:
      for (int i = 0; i < n; ++i) g(i, i) = state.a;
      break;
    case ModelKind::FubiniStudyCP1: {
      const double base = conformal_base(point);
      g(0, 0) = state.a / (base * base);
      break;
    }
  }
  return g;
}

Christoffel christoffel_at(const MetricState& state, const ChartPoint& point) {
  require_point(state, point);
  Christoffel gamma;
  gamma.n = state.model.complex_dimension;
  if (state.model.kind == ModelKind::FubiniStudyCP1) {
    // Gamma = d_z log g = -2 zbar / (1 + |z|^2); independent of a.
    gamma(0, 0, 0) = -2.0 * std::conj(point[0]) / conformal_base(point);
  }
  return gamma;
}

CurvatureData curvature_at(const MetricState& state, const ChartPoint& point) {
  require_point(state, point);
  CurvatureData data;
  const int n = state.model.complex_dimension;
  data.n = n;
  data.ricci = SmallMatrix::Zero(n, n);
  if (state.model.kind == ModelKind::FubiniStudyCP1) {
    const double base = conformal_base(point);
    const double g = state.a / (base * base);
    data(0, 0, 0, 0) = 2.0 / state.a * g * g;
    data.ricci(0, 0) = 2.0 / state.a * g;
    data.scalar = 2.0 / state.a;
  }
  return data;
}

double volume_density_at(const MetricState& state, const ChartPoint& point) {
  const SmallMatrix g = metric_at(state, point);
  return g.determinant().real();
}

double krf_scale(const ManifoldModel& model, double a0, double epsilon, double t) {
  if (!(a0 > 0.0)) throw InputError("a0 must be positive");
  if (!(t >= 0.0)) throw InputError("t must be non-negative");
  const double a = a0 - einstein_constant(model) * epsilon * t;
  if (!(a > 0.0)) {
    std::ostringstream msg;
    msg << "flow extinct: a(" << t << ") = " << a << " <= 0 (extinction at t = "
        << extinction_time(model, a0, epsilon) << ")";
    throw ExtinctionError(msg.str());
  }
  return a;
}

double bisectional_curvature(const CurvatureData& curvature, const SmallVector& v,
                             const SmallVector& w) {
  const int n = curvature.n;
  Complex sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          sum += curvature(i, j, k, l) * v[i] * std::conj(v[j]) * w[k] * std::conj(w[l]);
  return sum.real();
}

double bisectional_infimum(const MetricState& state, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw InputError("sample_count must be >= 1");
  state.model.validate();
  const int n = state.model.complex_dimension;
  const int res = state.model.grid_resolution;
  std::mt19937_64 rng(seed);

  auto sample_point = [&]() {
    ChartPoint p(n);
    if (state.model.kind == ModelKind::FlatTorus) {
      for (int i = 0; i < n; ++i) {
        const double x = std::floor(unit_uniform(rng) * res) / res * state.model.period(2 * i);
        const double y =
            std::floor(unit_uniform(rng) * res) / res * state.model.period(2 * i + 1);
        p[i] = Complex(x, y);
      }
    } else {
      const double theta = (std::floor(unit_uniform(rng) * res) + 0.5) * kPi / res;
      const double phi = std::floor(unit_uniform(rng) * res) * 2.0 * kPi / res;
      p[0] = std::polar(std::tan(0.5 * theta), phi);
    }
    return p;
  };
  auto sample_unit = [&](const SmallMatrix& g) {
    SmallVector v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = Complex(2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0);
    }
    if (v.norm() == 0.0) v[0] = 1.0;
    // g(v, vbar) = v^T g conj(v)
    const double len2 = (v.transpose() * g * v.conjugate())(0, 0).real();
    return SmallVector(v / std::sqrt(len2));
  };

  double inf = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sample_count; ++s) {
    const ChartPoint p = sample_point();
    const SmallMatrix g = metric_at(state, p);
    const CurvatureData curvature = curvature_at(state, p);
    const SmallVector v = sample_unit(g);
    const SmallVector w = sample_unit(g);
    inf = std::min(inf, bisectional_curvature(curvature, v, w));
  }
  return inf;
}

double curvature_symmetry_residual(const CurvatureData& c) {
  const int n = c.n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          worst = std::max(worst, std::abs(c(i, j, k, l) - c(k, j, i, l)));
          worst = std::max(worst, std::abs(c(i, j, k, l) - c(i, l, k, j)));
          worst = std::max(worst, std::abs(c(i, j, k, l) - c(k, l, i, j)));
        }
  return worst;
}

}  // namespace lyhlab::geom
