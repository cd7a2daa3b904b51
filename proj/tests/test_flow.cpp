#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lyhlab/error.hpp"
#include "lyhlab/flow.hpp"
#include "lyhlab/generators.hpp"
#include "lyhlab/trajectory_io.hpp"

using namespace lyhlab;
using namespace lyhlab::flow;

namespace {

const double pi = std::acos(-1.0);

geom::ManifoldModel unit_torus(int n = 32) { return geom::ManifoldModel::flat_torus(1, {1.0}, n); }

fields::ScalarField on(const fields::GridPtr& g, const std::function<double(double x, double y)>& f) {
  return fields::sample(g, [&](const ChartPoint& z) { return Complex(f(z[0].real(), z[0].imag())); });
}

Schedule window(double t0, double t1, int steps) {
  Schedule s;
  s.t_start = t0;
  s.t_end = t1;
  s.steps = steps;
  return s;
}

double max_gap(const fields::ScalarField& a, const fields::ScalarField& b) {
  double w = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) w = std::max(w, std::abs(a[p] - b[p]));
  return w;
}

}  // namespace

TEST_CASE("schedule times") {
  Schedule s = window(0.1, 0.5, 4);
  const auto t = s.snapshot_times();
  REQUIRE(t.size() == 5);
  CHECK(t.front() == doctest::Approx(0.1));
  CHECK(t[2] == doctest::Approx(0.3));
  CHECK(t.back() == 0.5);
  s.stride = 3;
  const auto strided = s.snapshot_times();
  REQUIRE(strided.size() == 3);
  CHECK(strided[1] == doctest::Approx(0.4));
  CHECK(strided[2] == 0.5);
  CHECK_THROWS_AS(window(0.3, 0.2, 4).validate(), ConfigError);
  CHECK_THROWS_AS(window(0.1, 0.2, 0).validate(), ConfigError);
}

TEST_CASE("constants are fixed points of the flat flow") {
  const auto model = unit_torus(16);
  const auto g = fields::make_grid(model);
  const auto traj = evolve_pair(model, 0.0, fields::constant_field(g, 1.0), fields::constant_field(g, 0.0),
                                window(0.01, 0.5, 7));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto s = traj.snapshot(k);
    CHECK(max_gap(s.u, fields::constant_field(g, 1.0)) < 1e-15);
    CHECK(s.v.max_abs() < 1e-15);
    CHECK(s.state.a == 1.0);
  }
}

TEST_CASE("single torus mode decays at rate pi^2") {
  const auto model = unit_torus();
  const auto g = fields::make_grid(model);
  const auto u0 = on(g, [](double x, double) { return 2.0 + std::cos(2 * pi * x); });
  const auto v0 = on(g, [](double, double y) { return 0.5 * std::sin(4 * pi * y); });
  const auto traj = evolve_pair(model, 0.0, u0, v0, window(0.01, 0.3, 5));
  for (double t : {0.05, 0.3}) {
    const auto s = traj.evaluate(t);
    const auto ue = on(g, [t](double x, double) { return 2.0 + std::exp(-pi * pi * t) * std::cos(2 * pi * x); });
    const auto ve = on(g, [t](double, double y) { return 0.5 * std::exp(-4 * pi * pi * t) * std::sin(4 * pi * y); });
    CHECK(max_gap(s.u, ue) < 1e-13);
    CHECK(max_gap(s.v, ve) < 1e-13);
  }
}

TEST_CASE("flow on the round sphere") {
  const auto model = geom::ManifoldModel::fubini_study_cp1(16);
  const auto g = fields::make_grid(model);

  // Spatially constant data grow by the integrating factor a0 / a(t).
  for (double a0 : {1.0, 2.0}) {
    const auto traj = evolve_pair(model, 1.0, fields::constant_field(g, 3.0), fields::constant_field(g, 1.0),
                                  window(0.01, 0.4, 3), a0);
    const double t = 0.3;
    const auto s = traj.evaluate(t);
    CHECK(std::abs(s.u[5].real() - 3.0 * a0 / (a0 - 2 * t)) < 1e-12);
    CHECK(std::abs(s.v[7].real() - a0 / (a0 - 2 * t)) < 1e-12);
    for (std::size_t k = 0; k < traj.size(); ++k)
      CHECK(traj.states()[k].a == doctest::Approx(a0 - 2 * traj.times()[k]).epsilon(1e-15));
  }

  // A degree-l harmonic obeys c' = (2 eps - l (l + 1)) c / a(t), so c = c0 (a / a0)^((l(l+1) - 2 eps) / (2 eps)).
  const int l = 3;
  const auto* sg = dynamic_cast<const fields::SphereGrid*>(g.get());
  REQUIRE(sg != nullptr);
  ComplexArray shape(g->size());
  for (std::size_t p = 0; p < g->size(); ++p) shape[p] = std::legendre(l, std::cos(sg->theta(p)));
  fields::ScalarField u0(g, ComplexArray(g->size()));
  for (std::size_t p = 0; p < g->size(); ++p) u0[p] = 2.0 + 0.5 * shape[p];
  for (double eps : {0.0, 0.5}) {
    const auto traj = evolve_pair(model, eps, u0, fields::constant_field(g, 0.0), window(0.01, 0.4, 3));
    const double t = 0.4, a = 1.0 - 2 * eps * t;
    const double constant = eps > 0 ? 2.0 / a : 2.0;
    const double decay = eps > 0 ? std::pow(a, (l * (l + 1) - 2 * eps) / (2 * eps)) : std::exp(-l * (l + 1) * t);
    const auto s = traj.evaluate(t);
    double w = 0.0;
    for (std::size_t p = 0; p < g->size(); ++p)
      w = std::max(w, std::abs(s.u[p] - (constant + 0.5 * decay * shape[p])));
    CHECK(w < 1e-12);
  }
}

TEST_CASE("initial data validation") {
  const auto model = unit_torus(16);
  const auto g = fields::make_grid(model);
  const auto one = fields::constant_field(g, 1.0);
  auto dip = one;
  dip[3] = 0.0;
  CHECK_THROWS_AS(evolve_pair(model, 0.0, dip, fields::constant_field(g, 0.0), window(0.01, 0.1, 2)), DomainError);
  CHECK_THROWS_AS(evolve_pair(model, 0.0, one, one, window(0.01, 0.1, 2)), DomainError);
  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(16);
  const auto gs = fields::make_grid(cp1);
  CHECK_THROWS_AS(evolve_pair(cp1, 1.0, fields::constant_field(gs, 1.0), fields::constant_field(gs, 0.0),
                              window(0.01, 0.5, 2)),
                  ExtinctionError);
  CHECK_THROWS_AS(evolve_pair(cp1, 0.0, one, one, window(0.01, 0.1, 2)), InputError);
}

TEST_CASE("ordering margin") {
  const auto g = fields::make_grid(unit_torus(16));
  CHECK(ordering_margin(fields::constant_field(g, 2.0), fields::constant_field(g, 1.0)) == doctest::Approx(1.0));
  CHECK(ordering_margin(fields::constant_field(g, 1.0), fields::constant_field(g, 1.0)) == 0.0);
  const auto u = on(g, [](double x, double) { return 2.0 + std::cos(2 * pi * x); });
  const auto v = on(g, [](double x, double) { return 0.9 * std::cos(2 * pi * x); });
  CHECK(ordering_margin(u, v) == doctest::Approx(0.1).epsilon(1e-12));
  const auto w = on(g, [](double x, double) { return std::cos(2 * pi * x); });
  CHECK(std::abs(ordering_margin(u, w)) < 1e-14);
}

TEST_CASE("mass is conserved") {
  const auto model = unit_torus(16);
  const auto g = fields::make_grid(model);
  const auto c = evolve_pair(model, 0.0, fields::constant_field(g, 3.0), fields::constant_field(g, 0.0),
                             window(0.01, 0.5, 4));
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(mass(c, k) == doctest::Approx(3.0).epsilon(1e-14));
  const auto m = evolve_pair(model, 0.0, on(g, [](double x, double) { return 2.0 + std::cos(2 * pi * x); }),
                             fields::constant_field(g, 0.0), window(0.01, 0.5, 4));
  for (std::size_t k = 0; k < m.size(); ++k) CHECK(mass(m, k) == doctest::Approx(2.0).epsilon(1e-14));

  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(16);
  const auto gs = fields::make_grid(cp1);
  const auto s = evolve_pair(cp1, 1.0, fields::constant_field(gs, 1.0), fields::constant_field(gs, 0.0),
                             window(0.01, 0.45, 4));
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(mass(s, k) - pi) < 1e-12);
}

TEST_CASE("semigroup and step-count independence") {
  const auto model = unit_torus(32);
  const auto g = fields::make_grid(model);
  fields::GeneratorSpec spec;
  spec.kind = fields::GeneratorKind::RandomBandlimited;
  spec.amplitude = 0.4;
  spec.seed = 11;
  const auto u0 = fields::generate(g, spec);
  spec.mean = 0.0;
  spec.seed = 12;
  const auto v0 = fields::generate(g, spec);
  const auto direct = evolve_pair(model, 0.0, u0, v0, window(0.01, 0.25, 4));
  const auto half = direct.evaluate(0.1);
  const auto restart = evolve_pair(model, 0.0, half.u, half.v, window(0.01, 0.15, 4));
  CHECK(max_gap(restart.evaluate(0.15).u, direct.evaluate(0.25).u) < 1e-10);
  CHECK(max_gap(restart.evaluate(0.15).v, direct.evaluate(0.25).v) < 1e-10);

  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(16);
  const auto gs = fields::make_grid(cp1);
  spec.mean = 1.0;
  const auto su = fields::generate(gs, spec);
  const auto coarse = evolve_pair(cp1, 1.0, su, fields::constant_field(gs, 0.0), window(0.01, 0.4, 10));
  const auto fine = evolve_pair(cp1, 1.0, su, fields::constant_field(gs, 0.0), window(0.01, 0.4, 20));
  CHECK(max_gap(coarse.snapshot(coarse.size() - 1).u, fine.snapshot(fine.size() - 1).u) < 1e-13);
}

TEST_CASE("heat kernel trajectory") {
  const auto model = unit_torus(128);
  const auto traj = heat_kernel_trajectory(model, window(0.01, 0.03, 2), 1.0, 0.5);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(mass(traj, k) == doctest::Approx(pi).epsilon(1e-12));
    const auto s = traj.snapshot(k);
    CHECK(ordering_margin(s.u, s.v) > 0.0);
  }
  // du/dt = Delta u from a centred difference.
  const double t = 0.02, dt = 1e-5;
  const auto a = traj.evaluate(t - dt), b = traj.evaluate(t), c = traj.evaluate(t + dt);
  const auto lap = fields::laplacian(b.u, b.state);
  double w = 0.0;
  for (std::size_t p = 0; p < b.u.size(); ++p)
    w = std::max(w, std::abs((c.u[p] - a.u[p]) / (2 * dt) - lap[p]));
  CHECK(w / lap.max_abs() < 1e-6);
  CHECK_THROWS_AS(heat_kernel_trajectory(geom::ManifoldModel::fubini_study_cp1(16), window(0.01, 0.02, 1)),
                  ConfigError);
}

TEST_CASE("trajectory files") {
  const auto model = unit_torus(8);
  const auto g = fields::make_grid(model);
  const auto traj = evolve_pair(model, 0.0, fields::constant_field(g, 2.0), fields::constant_field(g, 0.5),
                                window(0.1, 0.3, 2));
  const auto dir = std::filesystem::temp_directory_path() / "lyhlab_traj_test";
  std::filesystem::remove_all(dir);
  CHECK(write_trajectory(traj, dir) == 4);
  std::ifstream in(dir / "trajectory.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["snapshots"].size() == 3);
  CHECK(doc["snapshots"][2]["t"].get<double>() == doctest::Approx(0.3));
  std::ifstream csv(dir / doc["snapshots"][0]["file"].get<std::string>());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "node,re_z1,im_z1,u,v");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 64);
  std::filesystem::remove_all(dir);
}
