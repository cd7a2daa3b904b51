#include <doctest.h>

#include <cmath>
#include <functional>

#include "lyhlab/error.hpp"
#include "lyhlab/geom.hpp"

using namespace lyhlab;
using namespace lyhlab::geom;

namespace {

MetricState cp1_state(double a) { return {ManifoldModel::fubini_study_cp1(16), a, 0.0, 0.0}; }

ChartPoint at(Complex z) {
  ChartPoint p(1);
  p[0] = z;
  return p;
}

// d_z d_zbar f by central differences in x and y: (f_xx + f_yy) / 4.
double mixed_fd(const std::function<double(Complex)>& f, Complex z, double h = 1e-4) {
  const Complex dx(h, 0.0), dy(0.0, h);
  return (f(z + dx) + f(z - dx) + f(z + dy) + f(z - dy) - 4.0 * f(z)) / (4.0 * h * h);
}

}  // namespace

TEST_CASE("metric values on the model charts") {
  const MetricState torus{ManifoldModel::flat_torus(1, {1.0, 1.0}, 16), 1.0, 0.0, 0.0};
  CHECK(metric_at(torus, at({0.3, 0.7}))(0, 0) == Complex(1.0));
  CHECK(std::abs(metric_at(cp1_state(1.0), at(0.0))(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(metric_at(cp1_state(1.0), at({0.0, 1.0}))(0, 0) - 0.25) < 1e-15);
  CHECK(std::abs(metric_at(cp1_state(3.0), at(2.0))(0, 0) - 3.0 / 25.0) < 1e-15);
}

TEST_CASE("christoffel symbols") {
  const MetricState torus{ManifoldModel::flat_torus(2, {1, 1, 1, 1}, 8), 2.0, 0.0, 0.0};
  const Christoffel flat = christoffel_at(torus, ChartPoint::Zero(2));
  for (const Complex& v : flat.values) CHECK(std::abs(v) == 0.0);
  CHECK(std::abs(christoffel_at(cp1_state(1.0), at(0.0))(0, 0, 0)) < 1e-15);
  CHECK(std::abs(christoffel_at(cp1_state(1.0), at(1.0))(0, 0, 0) - Complex(-1.0)) < 1e-15);

  // Gamma = d_z log g against a difference quotient of log g along x and y.
  const Complex z(0.4, -0.9);
  auto logg = [](Complex w) { return -2.0 * std::log1p(std::norm(w)); };
  const double h = 1e-6;
  const Complex dz = 0.5 * ((logg(z + h) - logg(z - h)) / (2 * h) -
                            Complex(0, 1) * (logg(z + Complex(0, h)) - logg(z - Complex(0, h))) / (2 * h));
  CHECK(std::abs(christoffel_at(cp1_state(2.5), at(z))(0, 0, 0) - dz) < 1e-8);
}

TEST_CASE("curvature of the model metrics") {
  const MetricState torus{ManifoldModel::flat_torus(2, {1, 2, 1, 1}, 8), 1.0, 0.0, 0.0};
  const CurvatureData flat = curvature_at(torus, ChartPoint::Zero(2));
  CHECK(flat.scalar == 0.0);
  CHECK(flat.ricci.cwiseAbs().maxCoeff() == 0.0);

  const CurvatureData c0 = curvature_at(cp1_state(1.0), at(0.0));
  CHECK(std::abs(c0(0, 0, 0, 0) - 2.0) < 1e-14);
  CHECK(std::abs(c0.ricci(0, 0) - 2.0) < 1e-14);
  CHECK(std::abs(c0.scalar - 2.0) < 1e-14);
  CHECK(std::abs(curvature_at(cp1_state(2.0), at({0.7, 0.1})).scalar - 1.0) < 1e-14);

  // Ric = -d d-bar log g with a difference oracle.
  for (Complex z : {Complex(0.3, 0.2), Complex(-1.2, 0.5), Complex(2.0, -3.0)}) {
    const double a = 1.7;
    auto logg = [a](Complex w) { return std::log(a) - 2.0 * std::log1p(std::norm(w)); };
    const CurvatureData c = curvature_at(cp1_state(a), at(z));
    const double ric = -mixed_fd(logg, z);
    CHECK(std::abs(c.ricci(0, 0).real() - ric) < 1e-5 * std::max(1.0, std::abs(ric)));
    CHECK(curvature_symmetry_residual(c) < 1e-14);
    // Einstein: Ric = (2 / a) g, R = trace.
    const double g = metric_at(cp1_state(a), at(z))(0, 0).real();
    CHECK(std::abs(c.ricci(0, 0).real() - 2.0 * g / a) < 1e-12 * std::max(1.0, g));
    CHECK(std::abs(c(0, 0, 0, 0).real() / g - c.ricci(0, 0).real()) < 1e-12);
  }
}

TEST_CASE("bisectional curvature bounds") {
  const MetricState torus{ManifoldModel::flat_torus(1, {1.0, 1.0}, 16), 1.0, 0.0, 0.0};
  CHECK(bisectional_infimum(torus, 50) == 0.0);
  CHECK(std::abs(bisectional_infimum(cp1_state(1.0), 50) - 2.0) < 1e-10);
  CHECK(std::abs(bisectional_infimum(cp1_state(4.0), 50) - 0.5) < 1e-10);
  CHECK_THROWS_AS(bisectional_infimum(cp1_state(1.0), 0), InputError);
}

TEST_CASE("homothetic flow scale") {
  const auto torus = ManifoldModel::flat_torus(1, {1.0, 1.0}, 16);
  const auto cp1 = ManifoldModel::fubini_study_cp1(16);
  CHECK(krf_scale(torus, 1.0, 1.0, 5.0) == 1.0);
  CHECK(krf_scale(cp1, 1.0, 0.0, 3.0) == 1.0);
  CHECK(std::abs(krf_scale(cp1, 1.0, 1.0, 0.25) - 0.5) < 1e-15);
  CHECK(extinction_time(cp1, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(std::isinf(extinction_time(torus, 1.0, 1.0)));
  CHECK_THROWS_AS(krf_scale(cp1, 1.0, 1.0, 0.5), ExtinctionError);
  CHECK_THROWS_AS(krf_scale(cp1, 1.0, 1.0, 0.75), ExtinctionError);
}

TEST_CASE("volume density") {
  CHECK(volume_density_at({ManifoldModel::flat_torus(1, {1.0, 1.0}, 8), 1.0, 0.0, 0.0},
                          at(0.2)) == doctest::Approx(1.0));
  CHECK(volume_density_at({ManifoldModel::flat_torus(2, {1, 1, 1, 1}, 8), 3.0, 0.0, 0.0},
                          ChartPoint::Zero(2)) == doctest::Approx(9.0));
  CHECK(volume_density_at(cp1_state(1.0), at(1.0)) == doctest::Approx(0.25));
}

TEST_CASE("model validation names the offending field") {
  auto message = [](std::vector<double> periods, int resolution) {
    ManifoldModel m;
    m.periods = std::move(periods);
    m.grid_resolution = resolution;
    try {
      m.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({1.0, -1.0}, 16).rfind("periods", 0) == 0);
  CHECK(message({1.0}, 16).rfind("periods", 0) == 0);
  CHECK(message({1.0, 1.0}, 15).rfind("resolution", 0) == 0);
  CHECK(message({1.0, 1.0}, 6).rfind("resolution", 0) == 0);
  CHECK(message({1.0, 1.0}, 16).empty());
  CHECK_THROWS_AS(ManifoldModel::flat_torus(1, {0.0}, 16), ConfigError);
  CHECK(ManifoldModel::flat_torus(2, {2.0}, 8).periods == std::vector<double>(4, 2.0));
  CHECK_THROWS_AS(model_kind_from_string("sphere"), ConfigError);
  CHECK(model_kind_from_string("fubini_study_cp1") == ModelKind::FubiniStudyCP1);
}

TEST_CASE("non-finite chart points are rejected") {
  CHECK_THROWS_AS(metric_at(cp1_state(1.0), at({NAN, 0.0})), InputError);
  CHECK_THROWS_AS(metric_at(cp1_state(0.0), at(0.0)), InputError);
}
