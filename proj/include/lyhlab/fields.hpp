#pragma once

// Grid-sampled scalar and tensor fields, covariant derivatives in chart coordinates, Laplacians
// and integration.
//
// Index conventions: a Hermitian field stores T_{i jbar} at component (i, j); inverse metric
// contractions use G^{-1} (the plain matrix inverse of g_{i jbar}), so that
// g^{k lbar} A_{i kbar} B_{l jbar} = (A G^{-1} B)_{i j}.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "lyhlab/geom.hpp"
#include "lyhlab/grid.hpp"
#include "lyhlab/types.hpp"

namespace lyhlab::fields {

struct ScalarField {
  GridPtr grid;
  ComplexArray values;
  bool real = true;

  ScalarField() = default;
  ScalarField(GridPtr g, ComplexArray v, bool is_real = true)
      : grid(std::move(g)), values(std::move(v)), real(is_real) {}

  std::size_t size() const { return values.size(); }
  Complex operator[](std::size_t node) const { return values[node]; }
  Complex& operator[](std::size_t node) { return values[node]; }

  /// Largest imaginary part; real-tagged fields keep this below 1e-12.
  double max_imaginary() const;
  double max_abs() const;
  double min_real() const;
};

/// n x n matrix per node, stored component-major.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(GridPtr grid, int n);

  const GridPtr& grid() const { return grid_; }
  int dim() const { return n_; }
  std::size_t size() const { return grid_ ? grid_->size() : 0; }

  ComplexArray& component(int i, int j) { return components_[static_cast<std::size_t>(i * n_ + j)]; }
  const ComplexArray& component(int i, int j) const {
    return components_[static_cast<std::size_t>(i * n_ + j)];
  }

  SmallMatrix at(std::size_t node) const;
  void set(std::size_t node, const SmallMatrix& m);

  double max_abs() const;

 private:
  GridPtr grid_;
  int n_ = 0;
  std::vector<ComplexArray> components_;
};

/// T_{i jbar}; Hermitian at every node.
class HermitianField : public MatrixField {
 public:
  using MatrixField::MatrixField;
  /// Largest |T - T^H| entry over all nodes.
  double hermitian_defect() const;
};

/// S_{i j}; transpose-symmetric at every node.
class SymmetricField : public MatrixField {
 public:
  using MatrixField::MatrixField;
  double symmetry_defect() const;
};

/// Covariant derivative of a Hermitian tensor: holo[k] = nabla_k T, anti[k] = nabla_kbar T.
struct TensorGradient {
  std::vector<MatrixField> holo;
  std::vector<MatrixField> anti;
};

/// Node geometry of a metric state; a homothetic rescaling of the grid's reference geometry.
class GeometrySampler {
 public:
  GeometrySampler(GridPtr grid, geom::MetricState state);
  NodeGeometry at(std::size_t node) const;
  const geom::MetricState& state() const { return state_; }

 private:
  GridPtr grid_;
  geom::MetricState state_;
  bool uniform_;
  NodeGeometry cached_;
  const std::vector<NodeGeometry>* reference_ = nullptr;
};

// Construction helpers.
ScalarField sample(const GridPtr& grid, const std::function<Complex(const ChartPoint&)>& fn,
                   bool real = true);
ScalarField constant_field(const GridPtr& grid, Complex value);
HermitianField metric_field(const GridPtr& grid, const geom::MetricState& state);
HermitianField ricci_field(const GridPtr& grid, const geom::MetricState& state);
/// Scalar curvature sampled as a field.
ScalarField scalar_curvature_field(const GridPtr& grid, const geom::MetricState& state);

// Differential operators.
Partials partials(const ScalarField& f);
HermitianField mixed_hessian(const ScalarField& f);
SymmetricField holomorphic_hessian(const ScalarField& f, const geom::MetricState& state);
ScalarField laplacian(const ScalarField& f, const geom::MetricState& state);
TensorGradient covariant_derivative(const MatrixField& t, const geom::MetricState& state);
/// 1/2 g^{k lbar} (nabla_k nabla_lbar + nabla_lbar nabla_k) T.
HermitianField tensor_laplacian(const MatrixField& t, const geom::MetricState& state);

/// Quadrature of Re f against dmu_g = det(g) times chart Lebesgue measure.
double integrate(const ScalarField& f, const geom::MetricState& state);

/// Central difference (f(t + dt) - f(t - dt)) / (2 dt) from three equally spaced snapshots.
ScalarField fd_time_derivative(std::span<const ScalarField, 3> snapshots,
                               std::span<const double, 3> times);
MatrixField fd_time_derivative(std::span<const MatrixField, 3> snapshots,
                               std::span<const double, 3> times);

// Algebra helpers used by the Harnack assembly and identity checks.
MatrixField operator+(const MatrixField& a, const MatrixField& b);
MatrixField operator-(const MatrixField& a, const MatrixField& b);
MatrixField operator*(double s, const MatrixField& a);
/// Maximum entrywise |a - b| over nodes.
double max_difference(const MatrixField& a, const MatrixField& b);
void require_same_grid(const GridPtr& a, const GridPtr& b);

}  // namespace lyhlab::fields
