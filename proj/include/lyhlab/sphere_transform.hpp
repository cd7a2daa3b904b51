#pragma once

#include <span>
#include <vector>

#include "lyhlab/grid.hpp"
#include "lyhlab/types.hpp"

namespace lyhlab::fields {

/// Spherical harmonic transform on the half-offset colatitude grid.
///
/// Orthonormal associated Legendre functions (int_{-1}^{1} Pbar_l^m Pbar_l'^m dx = delta) combined
/// with e^{i m phi}; negative orders reuse Pbar_l^{|m|}, so real fields satisfy
/// c_{l,-m} = conj(c_{l,m}). Colatitude integrals use Fejer's first rule, exact for polynomials of
/// degree N - 1 in cos(theta), hence exact analysis up to degree N/2 - 1.
class SphereTransform {
 public:
  explicit SphereTransform(int resolution);

  int max_degree() const { return lmax_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  Spectrum analyze(std::span<const Complex> f) const;
  ComplexArray synthesize(const Spectrum& spectrum) const;

  double legendre(int l, int m, int row) const {
    return legendre_[(static_cast<std::size_t>(m) * (lmax_ + 1) + l) * n_ + row];
  }

 private:
  int n_;
  int lmax_;
  std::vector<double> weights_;
  std::vector<double> legendre_;
  std::vector<double> eigenvalues_;
};

/// Fejer first-rule weights for int_{-1}^{1} F(x) dx at x_j = cos((j + 1/2) pi / n).
std::vector<double> fejer_weights(int n);

}  // namespace lyhlab::fields
