#include "lyhlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "lyhlab/error.hpp"
#include "lyhlab/fft.hpp"
#include "lyhlab/sphere_transform.hpp"

namespace lyhlab::fields {
namespace {

std::size_t power(std::size_t base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

void require_size(std::span<const Complex> f, std::size_t size) {
  if (f.size() != size) throw InputError("sampled field does not match the grid size");
}

}  // namespace

SecondPartials Grid::second_partials(std::span<const Complex> f) const {
  const int n = dim();
  const Partials first = partials(f);
  SecondPartials out;
  out.mixed.resize(static_cast<std::size_t>(n * n));
  out.holo.resize(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j) {
    const Partials of_anti = partials(first.anti[static_cast<std::size_t>(j)]);
    const Partials of_holo = partials(first.holo[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i) {
      out.mixed[static_cast<std::size_t>(i * n + j)] = of_anti.holo[static_cast<std::size_t>(i)];
      out.holo[static_cast<std::size_t>(i * n + j)] = of_holo.holo[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

const std::vector<NodeGeometry>& Grid::reference_geometry() const {
  std::call_once(geometry_once_, [this] {
    const geom::MetricState unit{model_, 1.0, 0.0, 0.0};
    geometry_.resize(size_);
    for (std::size_t p = 0; p < size_; ++p) {
      const ChartPoint z = point(p);
      NodeGeometry& node = geometry_[p];
      node.g = geom::metric_at(unit, z);
      node.g_inv = node.g.inverse();
      node.gamma = geom::christoffel_at(unit, z);
      node.curvature = geom::curvature_at(unit, z);
    }
  });
  return geometry_;
}

GridPtr make_grid(const geom::ManifoldModel& model) {
  model.validate();
  switch (model.kind) {
    case geom::ModelKind::FlatTorus:
      return std::make_shared<TorusGrid>(model);
    case geom::ModelKind::FubiniStudyCP1:
      return std::make_shared<SphereGrid>(model);
  }
  throw ConfigError("kind: unsupported model");
}

// ---------------------------------------------------------------------------
// TorusGrid

TorusGrid::TorusGrid(const geom::ManifoldModel& model)
    : Grid(model, power(static_cast<std::size_t>(model.grid_resolution),
                        2 * model.complex_dimension)),
      axes_(2 * model.complex_dimension),
      dims_(static_cast<std::size_t>(2 * model.complex_dimension), model.grid_resolution) {
  const int n = model.complex_dimension;
  const int half = model.grid_resolution / 2;
  eigenvalues_.resize(size());
  holo_symbol_.assign(static_cast<std::size_t>(n), std::vector<Complex>(size()));
  anti_symbol_.assign(static_cast<std::size_t>(n), std::vector<Complex>(size()));
  for (std::size_t slot = 0; slot < size(); ++slot) {
    double lambda = 0.0;
    for (int axis = 0; axis < axes_; ++axis) {
      const double k = 2.0 * kPi * mode_index(slot, axis) / model.period(axis);
      lambda -= 0.25 * k * k;
    }
    eigenvalues_[slot] = lambda;
    for (int i = 0; i < n; ++i) {
      const int mx = mode_index(slot, 2 * i);
      const int my = mode_index(slot, 2 * i + 1);
      if (mx == -half || my == -half) continue;
      const double kx = 2.0 * kPi * mx / model.period(2 * i);
      const double ky = 2.0 * kPi * my / model.period(2 * i + 1);
      // d/dz = (d/dx - i d/dy)/2 acting on exp(i(kx x + ky y))
      holo_symbol_[static_cast<std::size_t>(i)][slot] = 0.5 * Complex(ky, kx);
      anti_symbol_[static_cast<std::size_t>(i)][slot] = 0.5 * Complex(-ky, kx);
    }
  }
}

double TorusGrid::coordinate(std::size_t node, int axis) const {
  const std::size_t res = static_cast<std::size_t>(resolution());
  const std::size_t idx = (node / power(res, axes_ - 1 - axis)) % res;
  return static_cast<double>(idx) * model().period(axis) / static_cast<double>(res);
}

int TorusGrid::mode_index(std::size_t slot, int axis) const {
  const std::size_t res = static_cast<std::size_t>(resolution());
  const int idx = static_cast<int>((slot / power(res, axes_ - 1 - axis)) % res);
  return idx < resolution() / 2 ? idx : idx - resolution();
}

ChartPoint TorusGrid::point(std::size_t node) const {
  ChartPoint p(dim());
  for (int i = 0; i < dim(); ++i) {
    p[i] = Complex(coordinate(node, 2 * i), coordinate(node, 2 * i + 1));
  }
  return p;
}

double TorusGrid::chart_weight(std::size_t) const {
  double w = 1.0;
  for (int axis = 0; axis < axes_; ++axis) w *= model().period(axis) / resolution();
  return w;
}

double TorusGrid::nyquist_wavenumber() const {
  const double shortest = *std::min_element(model().periods.begin(), model().periods.end());
  return 2.0 * kPi * (resolution() / 2 - 1) / shortest;
}

ComplexArray TorusGrid::apply_symbol(const ComplexArray& spectrum,
                                     const std::vector<Complex>& symbol) const {
  ComplexArray out(size());
  const double scale = 1.0 / static_cast<double>(size());
  for (std::size_t s = 0; s < size(); ++s) out[s] = spectrum[s] * symbol[s] * scale;
  fft::transform(out, dims_, fft::Direction::Backward);
  return out;
}

Partials TorusGrid::partials(std::span<const Complex> f) const {
  require_size(f, size());
  ComplexArray spectrum(f.begin(), f.end());
  fft::transform(spectrum, dims_, fft::Direction::Forward);
  Partials out;
  for (int i = 0; i < dim(); ++i) {
    out.holo.push_back(apply_symbol(spectrum, holo_symbol_[static_cast<std::size_t>(i)]));
    out.anti.push_back(apply_symbol(spectrum, anti_symbol_[static_cast<std::size_t>(i)]));
  }
  return out;
}

SecondPartials TorusGrid::second_partials(std::span<const Complex> f) const {
  require_size(f, size());
  const int n = dim();
  ComplexArray spectrum(f.begin(), f.end());
  fft::transform(spectrum, dims_, fft::Direction::Forward);
  SecondPartials out;
  out.mixed.resize(static_cast<std::size_t>(n * n));
  out.holo.resize(static_cast<std::size_t>(n * n));
  std::vector<Complex> symbol(size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& hi = holo_symbol_[static_cast<std::size_t>(i)];
      const auto& hj = holo_symbol_[static_cast<std::size_t>(j)];
      const auto& aj = anti_symbol_[static_cast<std::size_t>(j)];
      for (std::size_t s = 0; s < size(); ++s) symbol[s] = hi[s] * aj[s];
      out.mixed[static_cast<std::size_t>(i * n + j)] = apply_symbol(spectrum, symbol);
      if (j < i) {
        out.holo[static_cast<std::size_t>(i * n + j)] = out.holo[static_cast<std::size_t>(j * n + i)];
        continue;
      }
      for (std::size_t s = 0; s < size(); ++s) symbol[s] = hi[s] * hj[s];
      out.holo[static_cast<std::size_t>(i * n + j)] = apply_symbol(spectrum, symbol);
    }
  }
  return out;
}

Spectrum TorusGrid::analyze(std::span<const Complex> f) const {
  require_size(f, size());
  Spectrum out{ComplexArray(f.begin(), f.end())};
  fft::transform(out.coefficients, dims_, fft::Direction::Forward);
  const double scale = 1.0 / static_cast<double>(size());
  for (auto& c : out.coefficients) c *= scale;
  return out;
}

ComplexArray TorusGrid::synthesize(const Spectrum& spectrum) const {
  if (spectrum.coefficients.size() != size()) throw InputError("torus synthesis: wrong size");
  ComplexArray out = spectrum.coefficients;
  fft::transform(out, dims_, fft::Direction::Backward);
  return out;
}

// ---------------------------------------------------------------------------
// SphereGrid

SphereGrid::SphereGrid(const geom::ManifoldModel& model)
    : Grid(model, static_cast<std::size_t>(model.grid_resolution) * model.grid_resolution),
      n_(model.grid_resolution),
      transform_(std::make_unique<SphereTransform>(model.grid_resolution)) {
  theta_.resize(static_cast<std::size_t>(n_));
  phi_.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) theta_[static_cast<std::size_t>(j)] = (j + 0.5) * kPi / n_;
  for (int k = 0; k < n_; ++k) phi_[static_cast<std::size_t>(k)] = 2.0 * kPi * k / n_;
}

SphereGrid::~SphereGrid() = default;

double SphereGrid::theta(std::size_t node) const {
  return theta_[node / static_cast<std::size_t>(n_)];
}

double SphereGrid::phi(std::size_t node) const {
  return phi_[node % static_cast<std::size_t>(n_)];
}

int SphereGrid::max_degree() const { return transform_->max_degree(); }

ChartPoint SphereGrid::point(std::size_t node) const {
  ChartPoint p(1);
  p[0] = std::polar(std::tan(0.5 * theta(node)), phi(node));
  return p;
}

double SphereGrid::chart_weight(std::size_t node) const {
  // dx dy = (1 + r^2)^2 / 4 * sin(theta) dtheta dphi; Fejer weights absorb sin(theta) dtheta.
  const double r = std::tan(0.5 * theta(node));
  const double base = 1.0 + r * r;
  const double w = transform_->weights()[node / static_cast<std::size_t>(n_)];
  return w * (2.0 * kPi / n_) * base * base / 4.0;
}

double SphereGrid::nyquist_wavenumber() const { return max_degree(); }

const std::vector<double>& SphereGrid::laplacian_eigenvalues() const {
  return transform_->eigenvalues();
}

Spectrum SphereGrid::analyze(std::span<const Complex> f) const {
  require_size(f, size());
  return transform_->analyze(f);
}

ComplexArray SphereGrid::synthesize(const Spectrum& spectrum) const {
  return transform_->synthesize(spectrum);
}

void SphereGrid::angular_derivatives(std::span<const Complex> f, ComplexArray& f_theta,
                                     ComplexArray& f_phi) const {
  require_size(f, size());
  const std::size_t n = static_cast<std::size_t>(n_);
  const std::size_t rows = 2 * n;
  // Double Fourier sphere: f(2 pi - theta, phi) = f(theta, phi + pi).
  ComplexArray ext(rows * n);
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      ext[m * n + k] = m < n ? f[m * n + k] : f[(rows - 1 - m) * n + (k + n / 2) % n];
    }
  }
  const int dims[2] = {static_cast<int>(rows), n_};
  fft::transform(ext, dims, fft::Direction::Forward);
  ComplexArray dt(ext.size());
  ComplexArray dp(ext.size());
  const double scale = 1.0 / static_cast<double>(ext.size());
  for (std::size_t m = 0; m < rows; ++m) {
    const long km = m == n ? 0 : (m < n ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(rows));
    for (std::size_t k = 0; k < n; ++k) {
      const long kp = k == n / 2 ? 0 : (k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n));
      const Complex c = ext[m * n + k] * scale;
      dt[m * n + k] = Complex(0.0, static_cast<double>(km)) * c;
      dp[m * n + k] = Complex(0.0, static_cast<double>(kp)) * c;
    }
  }
  fft::transform(dt, dims, fft::Direction::Backward);
  fft::transform(dp, dims, fft::Direction::Backward);
  f_theta.assign(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(size()));
  f_phi.assign(dp.begin(), dp.begin() + static_cast<std::ptrdiff_t>(size()));
}

Partials SphereGrid::partials(std::span<const Complex> f) const {
  ComplexArray f_theta, f_phi;
  angular_derivatives(f, f_theta, f_phi);
  Partials out;
  out.holo.assign(1, ComplexArray(size()));
  out.anti.assign(1, ComplexArray(size()));
  for (std::size_t p = 0; p < size(); ++p) {
    const double half = 0.5 * theta(p);
    const double c = std::cos(half);
    const double radial = c * c;                         // 1 / (1 + r^2)
    const double angular = 0.5 / std::tan(half);         // 1 / (2 r)
    const Complex rot = std::polar(1.0, phi(p));         // e^{i phi}
    const Complex a = radial * f_theta[p];
    const Complex b = Complex(0.0, angular) * f_phi[p];
    out.holo[0][p] = std::conj(rot) * (a - b);
    out.anti[0][p] = rot * (a + b);
  }
  return out;
}

SecondPartials SphereGrid::second_partials(std::span<const Complex> f) const {
  Spectrum spectrum = analyze(f);
  const auto& eig = laplacian_eigenvalues();
  for (std::size_t i = 0; i < spectrum.coefficients.size(); ++i) spectrum.coefficients[i] *= eig[i];
  ComplexArray lap = synthesize(spectrum);
  SecondPartials out;
  out.mixed.assign(1, ComplexArray(size()));
  for (std::size_t p = 0; p < size(); ++p) {
    const double c = std::cos(0.5 * theta(p));
    out.mixed[0][p] = c * c * c * c * lap[p];
  }
  out.holo.assign(1, partials(partials(f).holo[0]).holo[0]);
  return out;
}

}  // namespace lyhlab::fields
