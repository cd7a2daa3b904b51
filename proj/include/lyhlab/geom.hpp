#pragma once

// Closed-form Kähler geometry of the model manifolds.
//
// Conventions used throughout the library:
//   * z = x + i y, d/dz = (d/dx - i d/dy)/2, so the flat reference metric g_{1 1bar} = 1
//     has Laplacian g^{i jbar} d_i d_jbar = (1/4) of the Euclidean one per complex dimension.
//   * Curvature R_{i jbar k lbar} = g_{p lbar} R_{i jbar k}^p with R_{i jbar k}^p = -d_jbar Gamma^p_{ik},
//     which makes the Fubini-Study curvature positive and gives the commutation rule
//     [nabla_k, nabla_jbar] v_i = -R_{k jbar i}^p v_p.
//   * The Fubini-Study metric on the stereographic chart of CP^1 is g = a / (1 + |z|^2)^2,
//     giving Ric = 2 g / a and scalar curvature 2 / a (Einstein constant 2).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lyhlab/types.hpp"

namespace lyhlab::geom {

enum class ModelKind { FlatTorus, FubiniStudyCP1 };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ManifoldModel {
  ModelKind kind = ModelKind::FlatTorus;
  int complex_dimension = 1;
  /// Real lattice periods in axis order (x1, y1, x2, y2, ...). FlatTorus only.
  std::vector<double> periods;
  int grid_resolution = 64;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  double period(int real_axis) const { return periods.at(static_cast<std::size_t>(real_axis)); }

  static ManifoldModel flat_torus(int complex_dimension, std::vector<double> periods,
                                  int grid_resolution);
  static ManifoldModel fubini_study_cp1(int grid_resolution);
};

bool operator==(const ManifoldModel& lhs, const ManifoldModel& rhs);

struct MetricState {
  ManifoldModel model;
  double a = 1.0;  // metric = a * reference metric
  double t = 0.0;
  double epsilon = 0.0;
};

/// Gamma^k_{ij}, stored as values[(k * n + i) * n + j].
struct Christoffel {
  int n = 1;
  std::array<Complex, 8> values{};

  Complex operator()(int k, int i, int j) const { return values[(k * n + i) * n + j]; }
  Complex& operator()(int k, int i, int j) { return values[(k * n + i) * n + j]; }
};

struct CurvatureData {
  int n = 1;
  /// R_{i jbar k lbar} at index ((i * n + j) * n + k) * n + l.
  std::array<Complex, 16> riemann{};
  SmallMatrix ricci;
  double scalar = 0.0;

  Complex operator()(int i, int j, int k, int l) const {
    return riemann[((i * n + j) * n + k) * n + l];
  }
  Complex& operator()(int i, int j, int k, int l) { return riemann[((i * n + j) * n + k) * n + l]; }
};

/// Einstein constant lambda with Ric = lambda g / a. Zero for the flat torus.
double einstein_constant(const ManifoldModel& model);

/// First time at which a0 - lambda * epsilon * t vanishes, +inf for static flows.
double extinction_time(const ManifoldModel& model, double a0, double epsilon);

SmallMatrix metric_at(const MetricState& state, const ChartPoint& point);
Christoffel christoffel_at(const MetricState& state, const ChartPoint& point);
CurvatureData curvature_at(const MetricState& state, const ChartPoint& point);
double volume_density_at(const MetricState& state, const ChartPoint& point);

/// Scale a(t) solving da/dt = -epsilon * lambda. Throws ExtinctionError when a(t) <= 0.
double krf_scale(const ManifoldModel& model, double a0, double epsilon, double t);

/// Infimum of R(v, vbar, w, wbar) over sample_count random (node, v, w) triples with
/// g-unit vectors v, w. Deterministic in `seed`.
double bisectional_infimum(const MetricState& state, int sample_count, std::uint64_t seed = 7);

/// Bisectional curvature R_{i jbar k lbar} v^i conj(v^j) w^k conj(w^l).
double bisectional_curvature(const CurvatureData& curvature, const SmallVector& v,
                             const SmallVector& w);

/// Residuals of the Kähler symmetries i<->k, jbar<->lbar and (i jbar)<->(k lbar).
double curvature_symmetry_residual(const CurvatureData& curvature);

}  // namespace lyhlab::geom
