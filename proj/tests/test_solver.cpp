// Backward-Euler flow solver: step contracts, oracle fidelity, equivariance,
// comparison principle and failure paths.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "logdiff/harness.hpp"
#include "logdiff/solver.hpp"

using namespace logdiff;

namespace {
std::shared_ptr<const RadialGrid> make_grid(int n = 256) {
  return std::make_shared<const RadialGrid>(n, 1.0 / 64.0);
}
}  // namespace

TEST_CASE("single step against the self-similar family") {
  // (2t+1)h is linear in t, so backward Euler is time-exact on it: the
  // one-step error against the continuum profile is dt * O(dr^2) (the cigar
  // test below exhibits the O(dt^2) truncation of genuinely curved-in-time
  // solutions).
  auto grid = make_grid();
  const auto u0 = sample(grid, [](double r) { return hyperbolic_h(r); });
  double err[2];
  int idx = 0;
  for (double dt : {2e-3, 1e-3}) {
    const auto u1 = step(u0, HyperbolicTrace{1.0}, dt);
    double worst = 0.0;
    for (int i = 0; i < grid->n; ++i) {
      if (grid->r(i) > 0.8) continue;  // spatial error dominates near the rim
      const double exact = (2.0 * dt + 1.0) * hyperbolic_h(grid->r(i));
      worst = std::max(worst, std::abs(u1.u[i] - exact) / exact);
    }
    err[idx++] = worst;
  }
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(err[1] < 1e-5);
}

TEST_CASE("constants are fixed points") {
  auto grid = make_grid(64);
  const double c = 2.5;
  const auto u0 = sample(grid, [c](double) { return c; });
  const auto u1 = step(u0, ConstantTrace{c}, 0.05);
  for (int i = 0; i < grid->n; ++i)
    CHECK(u1.u[i] == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("single step against the cigar with its exact trace") {
  auto grid = make_grid();
  const auto sol = ExactSolution::cigar_scaled(0.1);
  const auto u0 = sample(grid, [&](double r) { return sol(r, 0.0); });
  double err[2];
  int idx = 0;
  for (double dt : {2e-3, 1e-3}) {
    const auto u1 = step(u0, ExactTrace{sol}, dt);
    double worst = 0.0;
    for (int i = 0; i < grid->n; ++i) {
      const double exact = sol(grid->r(i), dt);
      worst = std::max(worst, std::abs(u1.u[i] - exact) / exact);
    }
    err[idx++] = worst;
  }
  CHECK(err[0] / err[1] > 3.0);
}

TEST_CASE("solve: hyperbolic flow stays on the self-similar ray") {
  auto grid = make_grid();
  FlowProblem<RadialGrid> prob;
  prob.initial = sample(grid, hyperbolic_h);
  prob.bc = HyperbolicTrace{1.0};
  prob.t_end = 1.0;
  prob.dt = 2e-3;
  const auto traj = solve(prob);
  REQUIRE(!traj.aborted);
  REQUIRE(traj.steps() == 501);
  double worst_interior = 0.0;
  for (int k = 0; k < traj.steps(); ++k) {
    for (int i = 0; i < grid->n; ++i) {
      if (grid->r(i) > 0.8) continue;
      const double exact =
          (2.0 * traj.times[k] + 1.0) * hyperbolic_h(grid->r(i));
      worst_interior =
          std::max(worst_interior, std::abs(traj.snapshots[k][i] - exact) / exact);
    }
  }
  CHECK(worst_interior < 2e-3);
  // positivity holds structurally
  for (const auto& snap : traj.snapshots)
    for (double v : snap) CHECK(v > 0.0);
}

TEST_CASE("solve: cigar fidelity at modest resolution") {
  auto grid = make_grid(256);
  const auto sol = ExactSolution::cigar_scaled(0.1);
  FlowProblem<RadialGrid> prob;
  prob.initial = sample(grid, [&](double r) { return sol(r, 0.0); });
  prob.bc = ExactTrace{sol};
  prob.t_end = 0.1;
  prob.dt = 1e-3;
  const auto traj = solve(prob);
  REQUIRE(!traj.aborted);
  double worst = 0.0;
  for (int i = 0; i < grid->n; ++i) {
    const double exact = sol(grid->r(i), 0.1);
    worst = std::max(worst, std::abs(traj.snapshots.back()[i] - exact) / exact);
  }
  CHECK(worst < 2e-3);
}

TEST_CASE("solver spatial order is ~2 against the cigar") {
  // dt small enough that the spatial part dominates the error budget
  const auto sol = ExactSolution::cigar_scaled(0.1);
  double err[2];
  int idx = 0;
  for (int n : {96, 192}) {
    auto grid = std::make_shared<const RadialGrid>(n, 1.0 / 64.0);
    FlowProblem<RadialGrid> prob;
    prob.initial = sample(grid, [&](double r) { return sol(r, 0.0); });
    prob.bc = ExactTrace{sol};
    prob.t_end = 0.05;
    prob.dt = 1.25e-4;
    const auto traj = solve(prob);
    REQUIRE(!traj.aborted);
    double worst = 0.0;
    for (int i = 0; i < grid->n; ++i) {
      const double exact = sol(grid->r(i), 0.05);
      worst = std::max(worst, std::abs(traj.snapshots.back()[i] - exact) / exact);
    }
    err[idx++] = worst;
  }
  CHECK(err[0] / err[1] > 2.5);
  CHECK(err[0] / err[1] < 6.0);
}

TEST_CASE("rescaling equivariance of the discrete scheme") {
  auto grid = make_grid(128);
  const auto u0 = sample(grid, [](double r) {
    const double d = (r - 0.25) / 0.1;
    return hyperbolic_h(r) + std::exp(-0.5 * d * d);
  });
  FlowProblem<RadialGrid> base;
  base.initial = u0;
  base.bc = HyperbolicTrace{1.0};
  base.t_end = 0.1;
  base.dt = 2e-3;
  const auto traj = solve(base);
  for (double lambda : {0.5, 2.0}) {
    FlowProblem<RadialGrid> scaled = base;
    for (double& v : scaled.initial.u) v *= lambda;
    scaled.bc = HyperbolicTrace{lambda};
    scaled.t_end = lambda * base.t_end;
    scaled.dt = lambda * base.dt;
    const auto traj2 = solve(scaled);
    REQUIRE(traj2.steps() == traj.steps());
    double worst = 0.0;
    for (int k = 0; k < traj.steps(); ++k)
      for (int i = 0; i < grid->n; ++i)
        worst = std::max(worst, std::abs(traj2.snapshots[k][i] -
                                         lambda * traj.snapshots[k][i]) /
                                    (lambda * traj.snapshots[k][i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("comparison principle") {
  auto grid = make_grid(128);
  SUBCASE("gamma-majorant stays above the flow it dominates") {
    const auto h = sample(grid, hyperbolic_h);
    const auto u0 = sample(grid, [](double r) {
      const double d = (r - 0.3) / 0.1;
      return hyperbolic_h(r) + 1.5 * std::exp(-0.5 * d * d);
    });
    const auto v0 = build_v0(u0, h.u, SmoothingGamma{0.5});
    FlowProblem<RadialGrid> lo, hi;
    lo.initial = u0;
    hi.initial = v0;
    lo.bc = hi.bc = HyperbolicTrace{1.0};
    lo.t_end = hi.t_end = 0.2;
    lo.dt = hi.dt = 2e-3;
    const auto rep = comparison_check(solve(lo), solve(hi));
    CHECK(rep.pass);
  }
  SUBCASE("identical problems have zero margin") {
    FlowProblem<RadialGrid> prob;
    prob.initial = sample(grid, hyperbolic_h);
    prob.bc = HyperbolicTrace{1.0};
    prob.t_end = 0.05;
    prob.dt = 1e-3;
    const auto a = solve(prob), b = solve(prob);
    const auto rep = comparison_check(a, b);
    CHECK(rep.pass);
    CHECK(std::abs(rep.margin) < 1e-12);
  }
  SUBCASE("randomized ordered pairs stay ordered") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(0.2, 2.0), c(0.0, 0.5),
        w(0.05, 0.2);
    for (int trial = 0; trial < 5; ++trial) {
      const double A = amp(rng), C = c(rng), W = w(rng);
      const double A2 = A + amp(rng), C2 = c(rng), W2 = w(rng);
      FlowProblem<RadialGrid> lo, hi;
      lo.initial = sample(grid, [&](double r) {
        const double d = (r - C) / W;
        return hyperbolic_h(r) + A * std::exp(-0.5 * d * d);
      });
      hi.initial = sample(grid, [&](double r) {
        const double dl = (r - C) / W, dh = (r - C2) / W2;
        return hyperbolic_h(r) + A * std::exp(-0.5 * dl * dl) +
               A2 * std::exp(-0.5 * dh * dh);
      });
      lo.bc = hi.bc = HyperbolicTrace{1.0};
      lo.t_end = hi.t_end = 0.1;
      lo.dt = hi.dt = 2e-3;
      // tolerance sits above Newton stopping noise on fields of size ~1e4
      const auto rep = comparison_check(solve(lo), solve(hi), 1e-5);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("annulus sandwich at small scale") {
  auto grid = std::make_shared<const RadialGrid>(96, 1.0 / 64.0, 0.7);
  FlowProblem<RadialGrid> prob;
  prob.initial = sample(grid, hyperbolic_h);
  prob.bc = AnnulusTrace{0.5};
  prob.t_end = 0.5;
  prob.dt = 2e-3;
  const auto traj = solve(prob);
  REQUIRE(!traj.aborted);
  const auto ha = HyperbolicMetric::annulus(0.5);
  double lower = 0.0, upper = 0.0;
  for (int k = 1; k < traj.steps(); ++k) {
    const double t = traj.times[k];
    for (int i = 0; i < grid->n; ++i) {
      const double r = grid->r(i);
      if (r < 0.9) continue;
      const double ratio =
          traj.snapshots[k][i] / ((2.0 * t + 1.0) * hyperbolic_h(r));
      lower = std::max(lower, 1.0 - ratio);
      upper = std::max(upper, ratio - ha.factor(r) / hyperbolic_h(r));
    }
  }
  CHECK(lower < 1e-3);
  CHECK(upper < 1e-3);
}

TEST_CASE("failure paths") {
  auto grid = make_grid(64);
  const auto u0 = sample(grid, hyperbolic_h);
  SUBCASE("step reports Newton diagnostics") {
    CHECK_THROWS_AS(step(u0, HyperbolicTrace{1.0}, 10.0, 1e-10, 1),
                    StepError);
  }
  SUBCASE("solve aborts with a partial trajectory after the dt floor") {
    FlowProblem<RadialGrid> prob;
    prob.initial = u0;
    prob.bc = HyperbolicTrace{1.0};
    prob.t_end = 10.0;
    prob.dt = 10.0;
    prob.newton_max_iter = 1;
    const auto traj = solve(prob);
    CHECK(traj.aborted);
    CHECK(!traj.abort_reason.empty());
    CHECK(traj.steps() >= 1);  // the initial snapshot survives
  }
  SUBCASE("t_end must be a multiple of dt") {
    FlowProblem<RadialGrid> prob;
    prob.initial = u0;
    prob.bc = HyperbolicTrace{1.0};
    prob.t_end = 0.05;
    prob.dt = 0.02;
    CHECK_THROWS_AS(solve(prob), std::invalid_argument);
  }
  SUBCASE("nonpositive initial data is rejected") {
    auto bad = u0;
    bad.u[5] = -1.0;
    FlowProblem<RadialGrid> prob;
    prob.initial = bad;
    prob.bc = HyperbolicTrace{1.0};
    prob.t_end = 0.01;
    prob.dt = 0.01;
    CHECK_THROWS_AS(solve(prob), std::domain_error);
  }
}

TEST_CASE("disk-grid solver matches the radial one on radial data") {
  auto rgrid = std::make_shared<const RadialGrid>(192, 1.0 / 16.0);
  auto dgrid = std::make_shared<const DiskGrid>(96, 1.0 / 16.0);
  const auto sol = ExactSolution::cigar_scaled(0.2);

  FlowProblem<RadialGrid> rp;
  rp.initial = sample(rgrid, [&](double r) { return sol(r, 0.0); });
  rp.bc = ExactTrace{sol};
  rp.t_end = 0.05;
  rp.dt = 2.5e-3;
  const auto rt = solve(rp);

  FlowProblem<DiskGrid> dp;
  dp.initial = sample_xy(
      dgrid, [&](double x, double y) { return sol(std::hypot(x, y), 0.0); });
  dp.bc = ExactTrace{sol};
  dp.t_end = 0.05;
  dp.dt = 2.5e-3;
  const auto dt_traj = solve(dp);
  REQUIRE(!dt_traj.aborted);

  // both should land near the closed form; the disk grid is coarser
  double worst = 0.0;
  for (int k = 0; k < dgrid->size(); ++k) {
    const double exact = sol(dgrid->radius(k), 0.05);
    worst = std::max(worst,
                     std::abs(dt_traj.snapshots.back()[k] - exact) / exact);
  }
  CHECK(worst < 5e-3);
  double worst_r = 0.0;
  for (int i = 0; i < rgrid->n; ++i) {
    const double exact = sol(rgrid->r(i), 0.05);
    worst_r = std::max(worst_r,
                       std::abs(rt.snapshots.back()[i] - exact) / exact);
  }
  CHECK(worst_r < 2e-3);
}
