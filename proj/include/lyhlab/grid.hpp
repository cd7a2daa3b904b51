#pragma once

// Sampling grids for the model manifolds and their chart derivative operators.
//
// FlatTorus: uniform periodic nodes on every real axis; derivatives by FFT.
// FubiniStudyCP1: colatitude/longitude nodes theta_j = (j + 1/2) pi / N, phi_k = 2 pi k / N mapped
// to z = tan(theta/2) e^{i phi}. Derivatives use the double Fourier sphere extension, which is
// smooth for any smooth function on the sphere (chart components included), so both angular
// derivatives are spectral.

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "lyhlab/geom.hpp"
#include "lyhlab/types.hpp"

namespace lyhlab::fields {

/// First chart derivatives of a sampled function: holo[i] = d f / dz^i, anti[i] = d f / dzbar^i.
struct Partials {
  std::vector<ComplexArray> holo;
  std::vector<ComplexArray> anti;
};

/// Second chart derivatives: mixed[i * n + j] = d_i d_jbar f, holo[i * n + j] = d_i d_j f.
struct SecondPartials {
  std::vector<ComplexArray> mixed;
  std::vector<ComplexArray> holo;
};

/// Spectral coefficients paired with eigenvalues of the reference (a = 1) Laplacian.
struct Spectrum {
  ComplexArray coefficients;
};

/// Closed-form geometry at one node.
struct NodeGeometry {
  SmallMatrix g;
  SmallMatrix g_inv;  // plain matrix inverse of g
  geom::Christoffel gamma;
  geom::CurvatureData curvature;
};

class Grid {
 public:
  virtual ~Grid() = default;

  const geom::ManifoldModel& model() const { return model_; }
  int dim() const { return model_.complex_dimension; }
  int resolution() const { return model_.grid_resolution; }
  std::size_t size() const { return size_; }

  virtual ChartPoint point(std::size_t node) const = 0;
  /// Chart Lebesgue quadrature weight; multiplied by det g it integrates against dmu_g.
  virtual double chart_weight(std::size_t node) const = 0;

  virtual Partials partials(std::span<const Complex> f) const = 0;
  virtual SecondPartials second_partials(std::span<const Complex> f) const;

  /// Forward transform onto the Laplacian eigenbasis; exact for band-limited samples.
  virtual Spectrum analyze(std::span<const Complex> f) const = 0;
  virtual ComplexArray synthesize(const Spectrum& spectrum) const = 0;
  /// Eigenvalues of the a = 1 Laplacian, aligned with Spectrum::coefficients.
  virtual const std::vector<double>& laplacian_eigenvalues() const = 0;

  /// Largest resolved angular wavenumber (torus: 2 pi (N/2 - 1) / min period; sphere: max degree).
  virtual double nyquist_wavenumber() const = 0;

  /// Geometry of the a = 1 metric at every node, computed on first use.
  const std::vector<NodeGeometry>& reference_geometry() const;

 protected:
  Grid(geom::ManifoldModel model, std::size_t size) : model_(std::move(model)), size_(size) {}

 private:
  geom::ManifoldModel model_;
  std::size_t size_;
  mutable std::once_flag geometry_once_;
  mutable std::vector<NodeGeometry> geometry_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the grid for a validated model.
GridPtr make_grid(const geom::ManifoldModel& model);

class TorusGrid final : public Grid {
 public:
  explicit TorusGrid(const geom::ManifoldModel& model);

  ChartPoint point(std::size_t node) const override;
  double chart_weight(std::size_t node) const override;
  Partials partials(std::span<const Complex> f) const override;
  SecondPartials second_partials(std::span<const Complex> f) const override;
  Spectrum analyze(std::span<const Complex> f) const override;
  ComplexArray synthesize(const Spectrum& spectrum) const override;
  const std::vector<double>& laplacian_eigenvalues() const override { return eigenvalues_; }
  double nyquist_wavenumber() const override;

  /// Real coordinate of `node` along real axis `axis` (0 = x1, 1 = y1, ...).
  double coordinate(std::size_t node, int axis) const;
  /// Integer wavenumber index of a spectral slot along `axis`, in [-N/2, N/2).
  int mode_index(std::size_t slot, int axis) const;

 private:
  ComplexArray apply_symbol(const ComplexArray& spectrum, const std::vector<Complex>& symbol) const;

  int axes_;
  std::vector<int> dims_;
  std::vector<double> eigenvalues_;
  // d/dz^i and d/dzbar^i symbols per spectral slot, Nyquist slots zeroed.
  std::vector<std::vector<Complex>> holo_symbol_;
  std::vector<std::vector<Complex>> anti_symbol_;
};

class SphereTransform;

class SphereGrid final : public Grid {
 public:
  explicit SphereGrid(const geom::ManifoldModel& model);
  ~SphereGrid() override;

  ChartPoint point(std::size_t node) const override;
  double chart_weight(std::size_t node) const override;
  Partials partials(std::span<const Complex> f) const override;
  /// Mixed part through the harmonic transform, which stays regular at both poles.
  SecondPartials second_partials(std::span<const Complex> f) const override;
  Spectrum analyze(std::span<const Complex> f) const override;
  ComplexArray synthesize(const Spectrum& spectrum) const override;
  const std::vector<double>& laplacian_eigenvalues() const override;
  double nyquist_wavenumber() const override;

  double theta(std::size_t node) const;
  double phi(std::size_t node) const;
  int max_degree() const;
  /// Index of coefficient (l, m), |m| <= l, in Spectrum::coefficients.
  static std::size_t harmonic_index(int l, int m) {
    return static_cast<std::size_t>(l * l + (m + l));
  }

  /// d f / d theta and d f / d phi via the double Fourier sphere extension.
  void angular_derivatives(std::span<const Complex> f, ComplexArray& f_theta,
                           ComplexArray& f_phi) const;

 private:
  int n_;
  std::vector<double> theta_;
  std::vector<double> phi_;
  std::unique_ptr<SphereTransform> transform_;
};

}  // namespace lyhlab::fields
