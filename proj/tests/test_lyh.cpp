#include <doctest.h>

#include <cmath>

#include "lyhlab/error.hpp"
#include "lyhlab/flow.hpp"
#include "lyhlab/generators.hpp"
#include "lyhlab/lyh.hpp"
#include "lyhlab/tensor.hpp"

using namespace lyhlab;
using namespace lyhlab::lyh;

namespace {

const double pi = std::acos(-1.0);

fields::GridPtr torus_grid(int n = 16, int dim = 1) {
  return fields::make_grid(geom::ManifoldModel::flat_torus(dim, {1.0}, n));
}

flow::Schedule window(double t0, double t1, int steps) {
  flow::Schedule s;
  s.t_start = t0;
  s.t_end = t1;
  s.steps = steps;
  return s;
}

double field_max(const fields::ScalarField& f) {
  double m = -1e300;
  for (const auto& v : f.values) m = std::max(m, v.real());
  return m;
}

}  // namespace

TEST_CASE("log density and quotient") {
  const auto g = torus_grid();
  CHECK(log_density(fields::constant_field(g, 1.0)).max_abs() == 0.0);
  const auto l2 = log_density(fields::constant_field(g, std::exp(2.0)));
  CHECK(std::abs(l2[9] - 2.0) < 1e-15);
  CHECK(l2.real);
  auto bad = fields::constant_field(g, 1.0);
  bad[17] = -0.5;
  CHECK_THROWS_WITH_AS(log_density(bad), doctest::Contains("17"), DomainError);

  const auto u = fields::sample(g, [](const ChartPoint& z) { return 2.0 + std::cos(2 * pi * z[0].real()); });
  auto half = u;
  for (auto& v : half.values) v *= 0.5;
  const auto h = quotient(u, half);
  CHECK(std::abs(h.min_real() - 0.5) < 1e-15);
  CHECK(field_max(h) == doctest::Approx(0.5));
  CHECK(quotient(u, fields::constant_field(g, 0.0)).max_abs() == 0.0);
  const auto v = fields::sample(g, [](const ChartPoint& z) { return 0.9 * std::cos(2 * pi * z[0].real()); });
  CHECK(quotient(u, v).max_abs() == doctest::Approx(0.9).epsilon(1e-14));
  CHECK_THROWS_AS(quotient(u, u), DomainError);
}

TEST_CASE("constraint tensor") {
  const auto g = torus_grid(8);
  CHECK(constraint_tensor(fields::constant_field(g, 0.3)).max_abs() < 1e-15);

  fields::Partials dh;
  dh.holo.assign(1, ComplexArray(g->size(), 1.0));
  dh.anti.assign(1, ComplexArray(g->size(), 1.0));
  CHECK(std::abs(constraint_tensor(fields::constant_field(g, 0.0), dh).component(0, 0)[0] - 1.0) < 1e-15);
  CHECK(std::abs(constraint_tensor(fields::constant_field(g, 0.6), dh).component(0, 0)[0] - 1.5625) < 1e-14);

  // Rank one with kernel orthogonal to grad h on a product torus.
  const auto g2 = torus_grid(16, 2);
  const auto h = fields::sample(g2, [](const ChartPoint& z) {
    return 0.3 * std::sin(2 * pi * z[0].real()) + 0.2 * std::cos(2 * pi * z[1].imag());
  });
  const auto c = constraint_tensor(h);
  CHECK(c.hermitian_defect() < 1e-14);
  for (std::size_t p = 0; p < g2->size(); p += 37) {
    const SmallMatrix m = c.at(p);
    CHECK(std::abs(m.determinant()) < 1e-12 * std::max(1.0, m.norm() * m.norm()));
    CHECK(tensor::hermitian_min_eigenvalue(m) > -1e-13);
  }
}

TEST_CASE("P and Q in the closed-form cases") {
  const auto g = torus_grid();
  fields::HermitianField zero(g, 1);
  const geom::MetricState flat{g->model(), 1.0, 2.0, 0.0};
  const auto q = compute_Q(zero, flat, 2.0);
  CHECK(std::abs(q.component(0, 0)[4] - 0.5) < 1e-15);
  CHECK_THROWS_AS(compute_Q(zero, flat, 0.0), InputError);

  // Proportional pair: every term of P vanishes.
  flow::FlowSnapshot pair;
  pair.t = 0.4;
  pair.state = {g->model(), 1.0, 0.4, 0.0};
  pair.u = fields::constant_field(g, 2.0);
  pair.v = fields::constant_field(g, 0.6);
  const auto s = assemble(pair, 0.0);
  CHECK(s.P.max_abs() < 1e-14);
  CHECK(std::abs(s.Q.component(0, 0)[0] - 2.5) < 1e-14);

  // Sphere, eps = 1, constant u: P = (2 / a) g and Q = (2 / a + 1 / t) g.
  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(16);
  const auto gs = fields::make_grid(cp1);
  const auto traj = flow::evolve_pair(cp1, 1.0, fields::constant_field(gs, 1.0), fields::constant_field(gs, 0.0),
                                      window(0.05, 0.3, 1));
  const auto end = traj.snapshot(1);
  const auto snap = assemble(end, 1.0);
  const double a = 1.0 - 2 * 0.3;
  double worst_p = 0.0, worst_q = 0.0;
  for (std::size_t p = 0; p < gs->size(); ++p) {
    const Complex gp = snap.metric.component(0, 0)[p];
    worst_p = std::max(worst_p, std::abs(snap.P.component(0, 0)[p] / gp - 2.0 / a));
    worst_q = std::max(worst_q, std::abs(snap.Q.component(0, 0)[p] / gp - (2.0 / a + 1.0 / 0.3)));
  }
  CHECK(worst_p < 1e-12);
  CHECK(worst_q < 1e-12);
}

TEST_CASE("assembly identities on random data") {
  for (auto model : {geom::ManifoldModel::flat_torus(2, {1.0, 1.3, 0.9, 1.0}, 16),
                     geom::ManifoldModel::fubini_study_cp1(32)}) {
    const auto g = fields::make_grid(model);
    fields::GeneratorSpec spec;
    spec.kind = fields::GeneratorKind::RandomBandlimited;
    spec.amplitude = 0.4;
    spec.seed = 5;
    const auto u0 = fields::generate(g, spec);
    spec.mean = 0.0;
    spec.seed = 6;
    const auto v0 = fields::generate(g, spec);
    const double eps = model.kind == geom::ModelKind::FlatTorus ? 0.0 : 0.5;
    const auto traj = flow::evolve_pair(model, eps, u0, v0, window(0.05, 0.2, 1));
    const auto pair = traj.snapshot(1);
    const auto s = assemble(pair, eps);

    double worst = 0.0;
    for (std::size_t p = 0; p < g->size(); ++p) {
      const SmallMatrix ric = s.ricci.at(p);
      const SmallMatrix expect_p = s.hess_L.at(p) + eps * ric - s.constraint.at(p);
      const SmallMatrix expect_q = expect_p + s.metric.at(p) / pair.t;
      const SmallMatrix expect_qu = s.hess_L.at(p) + eps * ric + s.metric.at(p) / pair.t;
      const double scale = std::max(1.0, s.Q.at(p).norm());
      worst = std::max({worst, (s.P.at(p) - expect_p).norm() / scale, (s.Q.at(p) - expect_q).norm() / scale,
                        (s.Q_unconstrained.at(p) - expect_qu).norm() / scale});
    }
    CHECK(worst < 1e-14);
    CHECK(s.Q.hermitian_defect() < 1e-12);
    CHECK(s.L.max_imaginary() < 1e-12);
    CHECK(dominance_violation(s, 10, 3) <= 1e-12);
    const auto audit = audit_decomposition(s);
    CHECK(audit.algebra_residual < 1e-12);
    CHECK(audit.min_constraint > -1e-12);
    CHECK(audit.min_holomorphic_product > -1e-12);
    CHECK(audit.min_mixed_product > -1e-12);
    CHECK(audit.constraint_rank_defect < 1e-10);
  }
}

TEST_CASE("Gaussian saturates the unconstrained estimate") {
  const auto model = geom::ManifoldModel::flat_torus(1, {1.0}, 512);
  const auto traj = flow::heat_kernel_trajectory(model, window(0.02, 0.04, 2));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto pair = traj.snapshot(k);
    const auto s = assemble(pair, 0.0);
    const auto lam = min_eigenvalue(s.Q, s.metric);
    CHECK(std::abs(lam.min_real()) * pair.t < 1e-6);
  }
}

TEST_CASE("Cao's quantity Y") {
  // a0 = 3, eps = 1, t = 1 gives a = 1: Y = ((2 / a)^2 + 2 / (a eps t)) g = 6 g.
  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(16);
  const auto gs = fields::make_grid(cp1);
  const auto traj = flow::evolve_pair(cp1, 1.0, fields::constant_field(gs, 1.0), fields::constant_field(gs, 0.0),
                                      window(0.5, 1.0, 1), 3.0);
  const auto pair = traj.snapshot(1);
  REQUIRE(pair.state.a == doctest::Approx(1.0));
  const auto s = assemble(pair, 1.0);
  const auto y = compute_Y(s, 1.0, 1.0);
  double worst = 0.0;
  for (std::size_t p = 0; p < gs->size(); ++p)
    worst = std::max(worst, std::abs(y.component(0, 0)[p] / s.metric.component(0, 0)[p] - 6.0));
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(compute_Y(s, 0.0, 1.0), InputError);

  const auto g = torus_grid();
  flow::FlowSnapshot flat;
  flat.t = 0.3;
  flat.state = {g->model(), 1.0, 0.3, 1.0};
  flat.u = fields::sample(g, [](const ChartPoint& z) { return 2.0 + std::cos(2 * pi * z[0].imag()); });
  flat.v = fields::constant_field(g, 0.0);
  CHECK(compute_Y(assemble(flat, 1.0), 1.0, 0.3).max_abs() < 1e-12);
}

TEST_CASE("eigenvalue certification") {
  const auto g = torus_grid(8, 2);
  fields::HermitianField m(g, 2);
  for (std::size_t p = 0; p < g->size(); ++p) {
    SmallMatrix a(2, 2);
    if (p % 2 == 0) {
      a << 2.0, Complex(0, 1), Complex(0, -1), 2.0;
    } else {
      a << 3.0, 0.0, 0.0, 5.0;
    }
    m.set(p, a);
  }
  const auto lam = min_eigenvalue(m);
  CHECK(std::abs(lam[0] - 1.0) < 1e-14);
  CHECK(std::abs(lam[1] - 3.0) < 1e-14);
  CHECK(lam.real);

  const geom::MetricState st{g->model(), 2.0, 0.0, 0.0};
  const auto metric = fields::metric_field(g, st);
  CHECK(std::abs(min_eigenvalue(m, metric)[1] - 1.5) < 1e-14);

  fields::HermitianField one(torus_grid(8), 1);
  CHECK(min_eigenvalue(one).max_abs() == 0.0);

  SmallMatrix skew(2, 2);
  skew << 1.0, 1.0, 0.0, 1.0;
  m.set(5, skew);
  CHECK_THROWS_AS(min_eigenvalue(m), ConsistencyError);

  SmallMatrix gm(2, 2), tm(2, 2);
  gm << 2.0, Complex(0.5, 0.5), Complex(0.5, -0.5), 1.0;
  tm << 1.0, 0.2, 0.2, -1.0;
  // Pencil minimum against the smaller root of det(T - lambda G) = 0.
  const Complex qa = gm.determinant();
  const Complex qb = -(tm(0, 0) * gm(1, 1) + tm(1, 1) * gm(0, 0) - tm(0, 1) * gm(1, 0) - tm(1, 0) * gm(0, 1));
  const Complex qc = tm.determinant();
  const double disc = std::sqrt((qb * qb - 4.0 * qa * qc).real());
  const double root = std::min((-qb.real() - disc) / (2 * qa.real()), (-qb.real() + disc) / (2 * qa.real()));
  CHECK(tensor::pencil_min_eigenvalue(tm, gm) == doctest::Approx(root).epsilon(1e-13));
}

TEST_CASE("report rows") {
  const auto model = geom::ManifoldModel::flat_torus(1, {1.0}, 16);
  const auto g = fields::make_grid(model);
  const auto traj = flow::evolve_pair(model, 0.0, fields::constant_field(g, 1.0), fields::constant_field(g, 0.0),
                                      window(0.5, 1.0, 1));
  const auto r = report(traj);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].min_q == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.rows[0].min_q == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.rows[1].margin == doctest::Approx(1.0));
  CHECK(r.rows[1].mass == doctest::Approx(1.0));
  CHECK(!r.rows[1].min_y.has_value());
  CHECK(r.verdict);
  CHECK(r.violation_count == 0);

  fields::GeneratorSpec spec;
  spec.kind = fields::GeneratorKind::RandomBandlimited;
  spec.amplitude = 0.4;
  spec.seed = 2;
  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(32);
  const auto gs = fields::make_grid(cp1);
  const auto u0 = fields::generate(gs, spec);
  spec.mean = 0.0;
  spec.seed = 3;
  const auto rc = report(flow::evolve_pair(cp1, 0.5, u0, fields::generate(gs, spec), window(0.01, 0.4, 6)));
  CHECK(rc.verdict);
  for (const auto& row : rc.rows) {
    REQUIRE(row.min_y.has_value());
    CHECK(*row.min_y >= -1e-6);
    CHECK(row.min_q <= row.min_q_unconstrained + 1e-12);
    CHECK(row.max_constraint_gap >= 0.0);
  }
}
