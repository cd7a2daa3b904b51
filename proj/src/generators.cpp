#include "lyhlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lyhlab/error.hpp"

namespace lyhlab::fields {
namespace {

const TorusGrid& as_torus(const GridPtr& grid) {
  const auto* torus = dynamic_cast<const TorusGrid*>(grid.get());
  if (!torus) throw ConfigError("generator: model is not a flat torus");
  return *torus;
}

const SphereGrid& as_sphere(const GridPtr& grid) {
  const auto* sphere = dynamic_cast<const SphereGrid*>(grid.get());
  if (!sphere) throw ConfigError("generator: model is not CP1");
  return *sphere;
}

ScalarField finish(const GridPtr& grid, std::vector<double> fluct, double mean, double amplitude) {
  double peak = 0.0;
  for (double v : fluct) peak = std::max(peak, std::abs(v));
  ComplexArray values(fluct.size());
  for (std::size_t p = 0; p < fluct.size(); ++p) {
    const double shape = peak > 0.0 ? fluct[p] / peak : 0.0;
    values[p] = Complex(mean + amplitude * shape, 0.0);
  }
  return ScalarField(grid, std::move(values));
}

// Enumerates integer wave vectors in [-K, K]^axes whose first nonzero entry is positive.
std::vector<std::vector<int>> half_space_modes(int axes, int max_mode) {
  std::vector<std::vector<int>> out;
  std::vector<int> k(static_cast<std::size_t>(axes), -max_mode);
  while (true) {
    auto first = std::find_if(k.begin(), k.end(), [](int v) { return v != 0; });
    if (first != k.end() && *first > 0) out.push_back(k);
    int axis = 0;
    while (axis < axes && ++k[static_cast<std::size_t>(axis)] > max_mode) {
      k[static_cast<std::size_t>(axis)] = -max_mode;
      ++axis;
    }
    if (axis == axes) break;
  }
  return out;
}

std::vector<double> torus_random(const TorusGrid& grid, int max_mode, std::mt19937_64& rng) {
  const int axes = 2 * grid.dim();
  const auto modes = half_space_modes(axes, max_mode);
  std::vector<double> fluct(grid.size(), 0.0);
  for (const auto& k : modes) {
    const double a = 2.0 * unit_uniform(rng()) - 1.0;
    const double b = 2.0 * unit_uniform(rng()) - 1.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      double phase = 0.0;
      for (int axis = 0; axis < axes; ++axis) {
        phase += 2.0 * kPi * k[static_cast<std::size_t>(axis)] * grid.coordinate(p, axis) /
                 grid.model().period(axis);
      }
      fluct[p] += a * std::cos(phase) + b * std::sin(phase);
    }
  }
  return fluct;
}

std::vector<double> sphere_random(const SphereGrid& grid, int max_mode, std::mt19937_64& rng) {
  std::vector<double> fluct(grid.size(), 0.0);
  for (int l = 1; l <= max_mode; ++l) {
    for (int m = 0; m <= l; ++m) {
      const double a = 2.0 * unit_uniform(rng()) - 1.0;
      const double b = m == 0 ? 0.0 : 2.0 * unit_uniform(rng()) - 1.0;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const double y = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(m),
                                           grid.theta(p));
        fluct[p] += y * (a * std::cos(m * grid.phi(p)) + b * std::sin(m * grid.phi(p)));
      }
    }
  }
  return fluct;
}

}  // namespace

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Constant:
      return "constant";
    case GeneratorKind::SingleMode:
      return "single_mode";
    case GeneratorKind::Gaussian:
      return "gaussian";
    case GeneratorKind::RandomBandlimited:
      return "random_bandlimited";
    case GeneratorKind::Proportional:
      return "proportional";
  }
  return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  if (name == "constant") return GeneratorKind::Constant;
  if (name == "single_mode") return GeneratorKind::SingleMode;
  if (name == "gaussian") return GeneratorKind::Gaussian;
  if (name == "random_bandlimited") return GeneratorKind::RandomBandlimited;
  if (name == "proportional") return GeneratorKind::Proportional;
  throw ConfigError("generator: unknown generator '" + name + "'");
}

ScalarField heat_kernel(const GridPtr& grid, double a, double t) {
  const TorusGrid& torus = as_torus(grid);
  if (!(t > 0.0)) throw InputError("heat_kernel: t must be positive");
  const int axes = 2 * torus.dim();
  const int res = torus.resolution();

  // Per-axis log of the image sum, evaluated stably.
  std::vector<std::vector<double>> log_axis(static_cast<std::size_t>(axes));
  for (int axis = 0; axis < axes; ++axis) {
    const double period = torus.model().period(axis);
    auto& table = log_axis[static_cast<std::size_t>(axis)];
    table.resize(static_cast<std::size_t>(res));
    for (int i = 0; i < res; ++i) {
      const double x = period * i / res - 0.5 * period;
      std::array<double, 5> expo{};
      for (int m = -2; m <= 2; ++m) {
        const double d = x - m * period;
        expo[static_cast<std::size_t>(m + 2)] = -a * d * d / t;
      }
      const double top = *std::max_element(expo.begin(), expo.end());
      double sum = 0.0;
      for (double e : expo) sum += std::exp(e - top);
      table[static_cast<std::size_t>(i)] = top + std::log(sum);
    }
  }

  const double base = -torus.dim() * std::log(t);
  ComplexArray values(grid->size());
  for (std::size_t p = 0; p < grid->size(); ++p) {
    double log_u = base;
    std::size_t rest = p;
    for (int axis = axes - 1; axis >= 0; --axis) {
      const auto i = rest % static_cast<std::size_t>(res);
      rest /= static_cast<std::size_t>(res);
      log_u += log_axis[static_cast<std::size_t>(axis)][i];
    }
    values[p] = std::exp(log_u);
  }
  return ScalarField(grid, std::move(values));
}

ScalarField generate(const GridPtr& grid, const GeneratorSpec& spec, double a0,
                     const ScalarField* reference) {
  const bool torus = grid->model().kind == geom::ModelKind::FlatTorus;
  switch (spec.kind) {
    case GeneratorKind::Constant:
      return constant_field(grid, Complex(spec.mean, 0.0));

    case GeneratorKind::SingleMode: {
      std::vector<double> shape(grid->size());
      if (torus) {
        const TorusGrid& g = as_torus(grid);
        if (spec.axis < 0 || spec.axis >= 2 * g.dim()) {
          throw ConfigError("axis: single_mode axis out of range");
        }
        const double period = g.model().period(spec.axis);
        for (std::size_t p = 0; p < g.size(); ++p) {
          shape[p] = std::cos(2.0 * kPi * spec.mode * g.coordinate(p, spec.axis) / period);
        }
      } else {
        const SphereGrid& g = as_sphere(grid);
        if (spec.mode < 0 || spec.mode > g.max_degree()) {
          throw ConfigError("mode: single_mode degree exceeds the grid bandwidth");
        }
        for (std::size_t p = 0; p < g.size(); ++p) {
          shape[p] = std::legendre(static_cast<unsigned>(spec.mode), std::cos(g.theta(p)));
        }
      }
      ComplexArray values(grid->size());
      for (std::size_t p = 0; p < values.size(); ++p) {
        values[p] = spec.mean + spec.amplitude * shape[p];
      }
      return ScalarField(grid, std::move(values));
    }

    case GeneratorKind::Gaussian:
      if (!torus) throw ConfigError("generator: gaussian data require a flat torus");
      return heat_kernel(grid, a0, spec.time);

    case GeneratorKind::RandomBandlimited: {
      if (spec.max_mode < 1) throw ConfigError("max_mode: must be >= 1");
      std::mt19937_64 rng(spec.seed);
      std::vector<double> fluct;
      if (torus) {
        const TorusGrid& g = as_torus(grid);
        if (spec.max_mode >= g.resolution() / 2) {
          throw ConfigError("max_mode: exceeds the grid Nyquist limit");
        }
        fluct = torus_random(g, spec.max_mode, rng);
      } else {
        const SphereGrid& g = as_sphere(grid);
        if (spec.max_mode > g.max_degree()) {
          throw ConfigError("max_mode: exceeds the grid bandwidth");
        }
        fluct = sphere_random(g, spec.max_mode, rng);
      }
      return finish(grid, std::move(fluct), spec.mean, spec.amplitude);
    }

    case GeneratorKind::Proportional: {
      if (!reference) throw ConfigError("generator: proportional data need a reference field");
      ScalarField out = *reference;
      for (auto& v : out.values) v *= spec.ratio;
      return out;
    }
  }
  throw ConfigError("generator: unsupported kind");
}

}  // namespace lyhlab::fields
