// Acceptance criteria, one PASS/FAIL line each. Exit status is nonzero if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lyhlab/checks.hpp"
#include "lyhlab/experiment.hpp"
#include "lyhlab/flow.hpp"
#include "lyhlab/generators.hpp"
#include "lyhlab/lyh.hpp"

using namespace lyhlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void verdict(int id, bool pass, const std::string& detail, double secs) {
  std::printf("criterion %d: %s  %s  [%.1fs]\n", id, pass ? "PASS" : "FAIL", detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Smallest eigenvalue of the pencil (T, g) by a general-purpose solver.
double pencil_min(const fields::MatrixField& t, const fields::MatrixField& g, std::size_t p) {
  const int n = t.dim();
  Eigen::MatrixXcd a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = t.component(i, j)[p];
      b(i, j) = g.component(i, j)[p];
    }
  a = (0.5 * (a + a.adjoint())).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, b, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double field_min(const fields::MatrixField& t, const fields::MatrixField& g) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < t.size(); ++p) m = std::min(m, pencil_min(t, g, p));
  return m;
}

// max over nodes and random unit w of w* (Q - Q_unconstrained) w.
double dominance(const lyh::LYHSnapshot& s, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  const int n = s.Q.dim();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s.Q.size(); ++p) {
    const SmallMatrix d = s.Q.at(p) - s.Q_unconstrained.at(p);
    for (int k = 0; k < 10; ++k) {
      SmallVector w(n);
      for (int i = 0; i < n; ++i) w[i] = Complex(gauss(rng), gauss(rng));
      w /= w.norm();
      worst = std::max(worst, (w.adjoint() * d * w)(0, 0).real());
    }
  }
  return worst;
}

fields::GeneratorSpec random_spec(double mean, double amplitude, std::uint64_t seed) {
  fields::GeneratorSpec s;
  s.kind = fields::GeneratorKind::RandomBandlimited;
  s.mean = mean;
  s.amplitude = amplitude;
  s.max_mode = 2;
  s.seed = seed;
  return s;
}

struct PositivityStats {
  double min_q = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double worst_mass_torus = 0.0;
  double worst_mass_cp1 = 0.0;
  double worst_margin_ratio = std::numeric_limits<double>::infinity();
  double min_initial_margin = std::numeric_limits<double>::infinity();
  double worst_dominance = -std::numeric_limits<double>::infinity();
  double worst_krf = 0.0;
  int runs = 0;
  int y_runs = 0;
};

void positivity_run(const geom::ManifoldModel& model, double epsilon, double t_end,
                    std::uint64_t seed, PositivityStats& st) {
  const double a0 = 1.0;
  const auto grid = fields::make_grid(model);
  const auto u0 = fields::generate(grid, random_spec(1.0, 0.4, seed), a0);
  const auto v0 = fields::generate(grid, random_spec(0.0, 0.4, seed ^ experiment::kSeedMix), a0);
  flow::Schedule schedule;
  schedule.t_start = 0.01;
  schedule.t_end = t_end;
  schedule.steps = 49;
  const auto traj = flow::evolve_pair(model, epsilon, u0, v0, schedule, a0);

  const double margin0 = flow::ordering_margin(u0, v0);
  geom::MetricState s0{model, a0, 0.0, epsilon};
  const double mass0 = fields::integrate(u0, s0);
  st.min_initial_margin = std::min(st.min_initial_margin, margin0);
  const bool torus = model.kind == geom::ModelKind::FlatTorus;
  std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(epsilon * 1000));

  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto pair = traj.snapshot(k);
    const auto snap = lyh::assemble(pair, epsilon);
    st.min_q = std::min(st.min_q, field_min(snap.Q, snap.metric));
    if (!torus && epsilon > 0.0) {
      st.min_y = std::min(st.min_y, field_min(lyh::compute_Y(snap, epsilon, pair.t), snap.metric));
    }
    const double drift = std::abs(flow::mass(traj, k) - mass0) / std::abs(mass0);
    (torus ? st.worst_mass_torus : st.worst_mass_cp1) =
        std::max(torus ? st.worst_mass_torus : st.worst_mass_cp1, drift);
    st.worst_margin_ratio = std::min(st.worst_margin_ratio, flow::ordering_margin(pair.u, pair.v) / margin0);
    st.worst_dominance = std::max(st.worst_dominance, dominance(snap, rng));
    if (!torus) {
      st.worst_krf = std::max(st.worst_krf, std::abs(traj.states()[k].a - (a0 - 2.0 * epsilon * traj.times()[k])));
    }
  }
  ++st.runs;
  if (!torus && epsilon > 0.0) ++st.y_runs;
}

void criteria_1_and_5_to_8() {
  const auto start = Clock::now();
  PositivityStats st;
  const auto torus = geom::ManifoldModel::flat_torus(1, {1.0, 1.0}, 64);
  const auto cp1 = geom::ManifoldModel::fubini_study_cp1(64);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    positivity_run(torus, 0.0, 0.5, seed, st);
    positivity_run(cp1, 0.0, 0.5, seed, st);
    positivity_run(cp1, 0.5, 0.5, seed, st);
    positivity_run(cp1, 1.0, 0.4, seed, st);
  }
  const double secs = seconds_since(start);

  const bool margins_ok = st.min_initial_margin >= 0.1;
  verdict(1, st.min_q >= -1e-6 && secs <= 120.0 && margins_ok && st.runs == 80,
          std::to_string(st.runs) + " runs, min lambda(Q) = " + fmt("%.6g", st.min_q) +
              ", min initial margin " + fmt("%.4f", st.min_initial_margin) + ", runtime " +
              fmt("%.1fs", secs) + " (limit 120s)",
          secs);
  verdict(5, st.y_runs == 40 && st.min_y >= -1e-6,
          std::to_string(st.y_runs) + " runs, min lambda(Y) = " + fmt("%.6g", st.min_y), 0.0);
  verdict(6,
          st.worst_mass_torus <= 1e-8 && st.worst_mass_cp1 <= 1e-6 && st.worst_margin_ratio >= 0.5,
          "mass drift torus " + fmt("%.3g", st.worst_mass_torus) + ", CP1 " +
              fmt("%.3g", st.worst_mass_cp1) + ", min margin / initial " +
              fmt("%.4f", st.worst_margin_ratio),
          0.0);
  verdict(7, st.worst_dominance <= 1e-12,
          "max w*(Q - Q_unconstrained)w = " + fmt("%.3g", st.worst_dominance), 0.0);
  verdict(8, st.worst_krf <= 1e-12, "max |a(t) - (a0 - 2 eps t)| = " + fmt("%.3g", st.worst_krf),
          0.0);
}

void criterion_2() {
  const auto start = Clock::now();
  const auto model = geom::ManifoldModel::flat_torus(1, {1.0, 1.0}, 2048);
  flow::Schedule schedule;
  schedule.t_start = 0.002;
  schedule.t_end = 0.01;
  schedule.steps = 4;
  const auto traj = flow::heat_kernel_trajectory(model, schedule, 1.0, 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto pair = traj.snapshot(k);
    const auto snap = lyh::assemble(pair, 0.0);
    worst = std::max(worst, std::abs(field_min(snap.Q, snap.metric)) * pair.t);
  }
  const double secs = seconds_since(start);
  verdict(2, worst <= 1e-6, "max |min lambda(Q)| t = " + fmt("%.3g", worst), secs);
}

// Least-squares slope of log r against log dt.
double fitted_order(const std::vector<double>& dts, const std::vector<double>& r) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]), y = std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void criteria_3_and_9() {
  const auto start = Clock::now();
  const std::vector<double> dts{4e-4, 2e-4, 1e-4};
  const double t = 0.1;
  const auto model = geom::ManifoldModel::flat_torus(1, {1.0, 1.0}, 64);
  double worst_rel = 0.0;
  double order_lo = std::numeric_limits<double>::infinity();
  double order_hi = -std::numeric_limits<double>::infinity();
  double worst_d = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto grid = fields::make_grid(model);
    const auto u0 = fields::generate(grid, random_spec(1.0, 0.4, seed));
    const auto v0 = fields::generate(grid, random_spec(0.0, 0.4, seed ^ experiment::kSeedMix));
    flow::Schedule schedule;
    schedule.t_start = 0.01;
    schedule.t_end = 0.2;
    schedule.steps = 19;
    const auto traj = flow::evolve_pair(model, 0.0, u0, v0, schedule);
    using Check = checks::IdentityResidual (*)(const flow::FlowTrajectory&, double, double,
                                               const checks::IdentityTolerance&);
    const Check all[] = {&checks::check_L_evolution, &checks::check_lemma1, &checks::check_lemma3};
    for (Check check : all) {
      std::vector<double> rel;
      for (double dt : dts) rel.push_back(check(traj, t, dt, {}).rel_residual);
      worst_rel = std::max(worst_rel, rel.back());
      const double order = fitted_order(dts, rel);
      order_lo = std::min(order_lo, order);
      order_hi = std::max(order_hi, order);
    }
    for (double dt : dts) {
      const auto r = checks::check_q_evolution_inequality(traj, t, dt, 1e-4);
      worst_d = std::max(worst_d, r.abs_residual);
    }
  }
  const double secs = seconds_since(start);
  verdict(3, worst_rel <= 1e-5 && order_lo >= 1.8 && order_hi <= 2.2 && secs <= 180.0,
          "max rel residual at dt=1e-4 " + fmt("%.3g", worst_rel) + ", fitted orders in [" +
              fmt("%.3f", order_lo) + ", " + fmt("%.3f", order_hi) + "]",
          secs);
  verdict(9, worst_d <= 1e-4, "min lambda(D) = " + fmt("%.3g", -worst_d), 0.0);
}

void criterion_4() {
  const auto start = Clock::now();
  const auto model = geom::ManifoldModel::fubini_study_cp1(64);
  double worst = 0.0;
  for (double a : {1.0, 2.0, 3.0}) {
    worst = std::max(worst, checks::check_ricci_formula(model, a).abs_residual);
    for (double eps : {0.5, 1.0}) {
      worst = std::max(worst, checks::check_lemma2(model, a, eps, 0.1, 1e-4).abs_residual);
    }
  }
  verdict(4, worst <= 1e-8, "max residual " + fmt("%.3g", worst), seconds_since(start));
}

}  // namespace

int main() {
  criteria_1_and_5_to_8();
  criterion_2();
  criteria_3_and_9();
  criterion_4();
  std::printf("%s\n", failures == 0 ? "all criteria PASS" : "some criteria FAIL");
  return failures == 0 ? 0 : 1;
}
