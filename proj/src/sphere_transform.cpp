#include "lyhlab/sphere_transform.hpp"

#include <cmath>

#include "lyhlab/error.hpp"
#include "lyhlab/fft.hpp"

namespace lyhlab::fields {

std::vector<double> fejer_weights(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double theta = (j + 0.5) * kPi / n;
    double sum = 0.0;
    for (int k = 1; k <= n / 2; ++k) {
      sum += std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
    }
    w[static_cast<std::size_t>(j)] = 2.0 / n * (1.0 - 2.0 * sum);
  }
  return w;
}

SphereTransform::SphereTransform(int resolution)
    : n_(resolution), lmax_(resolution / 2 - 1), weights_(fejer_weights(resolution)) {
  const std::size_t stride = static_cast<std::size_t>(n_);
  legendre_.assign(static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 1) * stride, 0.0);
  auto at = [&](int l, int m, int row) -> double& {
    return legendre_[(static_cast<std::size_t>(m) * (lmax_ + 1) + l) * stride + row];
  };
  for (int row = 0; row < n_; ++row) {
    const double theta = (row + 0.5) * kPi / n_;
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    double diag = 1.0 / std::sqrt(2.0);
    for (int m = 0; m <= lmax_; ++m) {
      if (m > 0) diag *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      at(m, m, row) = diag;
      if (m + 1 <= lmax_) at(m + 1, m, row) = std::sqrt(2.0 * m + 3.0) * x * diag;
      for (int l = m + 2; l <= lmax_; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
        const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
        at(l, m, row) = a * (x * at(l - 1, m, row) - b * at(l - 2, m, row));
      }
    }
  }
  eigenvalues_.resize(static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 1));
  for (int l = 0; l <= lmax_; ++l) {
    for (int m = -l; m <= l; ++m) {
      eigenvalues_[SphereGrid::harmonic_index(l, m)] = -static_cast<double>(l) * (l + 1);
    }
  }
}

Spectrum SphereTransform::analyze(std::span<const Complex> f) const {
  const std::size_t stride = static_cast<std::size_t>(n_);
  if (f.size() != stride * stride) throw InputError("sphere transform: wrong sample count");
  ComplexArray rows(f.begin(), f.end());
  fft::transform_rows(rows, n_, n_, fft::Direction::Forward);
  Spectrum out;
  out.coefficients.assign(static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 1), Complex(0.0));
  for (int m = -lmax_; m <= lmax_; ++m) {
    const std::size_t slot = static_cast<std::size_t>((m + n_) % n_);
    const int am = std::abs(m);
    for (int l = am; l <= lmax_; ++l) {
      Complex sum = 0.0;
      for (int row = 0; row < n_; ++row) {
        sum += weights_[static_cast<std::size_t>(row)] * legendre(l, am, row) *
               rows[static_cast<std::size_t>(row) * stride + slot];
      }
      out.coefficients[SphereGrid::harmonic_index(l, m)] = sum / static_cast<double>(n_);
    }
  }
  return out;
}

ComplexArray SphereTransform::synthesize(const Spectrum& spectrum) const {
  const std::size_t stride = static_cast<std::size_t>(n_);
  if (spectrum.coefficients.size() != static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 1)) {
    throw InputError("sphere transform: wrong coefficient count");
  }
  ComplexArray rows(stride * stride, Complex(0.0));
  for (int m = -lmax_; m <= lmax_; ++m) {
    const std::size_t slot = static_cast<std::size_t>((m + n_) % n_);
    const int am = std::abs(m);
    for (int row = 0; row < n_; ++row) {
      Complex sum = 0.0;
      for (int l = am; l <= lmax_; ++l) {
        sum += spectrum.coefficients[SphereGrid::harmonic_index(l, m)] * legendre(l, am, row);
      }
      rows[static_cast<std::size_t>(row) * stride + slot] = sum;
    }
  }
  fft::transform_rows(rows, n_, n_, fft::Direction::Backward);
  return rows;
}

}  // namespace lyhlab::fields
