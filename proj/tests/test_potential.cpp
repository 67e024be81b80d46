// Potential/Harnack machinery: Poisson solves, psi evolution, the Harnack
// forms and their evolution identity, corollary bounds, Brezis-Merle.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "logdiff/harness.hpp"
#include "logdiff/potential.hpp"

using namespace logdiff;

namespace {

std::shared_ptr<const RadialGrid> make_grid(int n, double eps = 1.0 / 64.0) {
  return std::make_shared<const RadialGrid>(n, eps);
}

// One rim-flat bump over h, mass-normalized; the workhorse initial data.
RadialField bump_v0(std::shared_ptr<const RadialGrid> grid, double mass) {
  auto raw = sample(grid, [](double r) {
    const double d = (r - 0.25) / 0.12;
    return std::exp(-0.5 * d * d) * detail::rim_cutoff(r);
  });
  const double m0 = lp_norm(raw, 1.0);
  return sample(grid, [&, scale = mass / m0](double r) {
    const double d = (r - 0.25) / 0.12;
    return hyperbolic_h(r) +
           scale * std::exp(-0.5 * d * d) * detail::rim_cutoff(r);
  });
}

struct Run {
  std::shared_ptr<const RadialGrid> grid;
  RadialField v0;
  Trajectory<RadialGrid> traj;
  PotentialState psi;
};

Run run_bump(int n, double t_end, double dt) {
  Run out;
  out.grid = make_grid(n);
  out.v0 = bump_v0(out.grid, 0.8);
  FlowProblem<RadialGrid> prob;
  prob.initial = out.v0;
  prob.bc = HyperbolicTrace{1.0};
  prob.t_end = t_end;
  prob.dt = dt;
  out.traj = solve(prob);
  REQUIRE(!out.traj.aborted);
  const auto h = sample(out.grid, hyperbolic_h);
  std::vector<double> f(out.v0.u.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = out.v0.u[i] - h.u[i];
  out.psi = evolve_psi(poisson_zero_dirichlet(f, *out.grid), out.traj);
  return out;
}

}  // namespace

TEST_CASE("radial Poisson solve with zero rim trace") {
  auto grid = make_grid(128);
  SUBCASE("zero source, zero potential") {
    std::vector<double> f(grid->n, 0.0);
    for (double v : poisson_zero_dirichlet(f, *grid)) CHECK(v == 0.0);
  }
  SUBCASE("f = 4 gives r^2 - R^2 exactly (trapezoid is exact on linears)") {
    std::vector<double> f(grid->n, 4.0);
    const auto psi = poisson_zero_dirichlet(f, *grid);
    const double R = grid->outer();
    for (int i = 0; i < grid->n; ++i)
      CHECK(psi[i] ==
            doctest::Approx(grid->r(i) * grid->r(i) - R * R).epsilon(1e-12));
    CHECK(psi[0] == doctest::Approx(-R * R).epsilon(1e-13));
  }
  SUBCASE("nonnegative sources give nonpositive potentials") {
    const auto v0 = bump_v0(grid, 0.7);
    std::vector<double> f(grid->n);
    for (int i = 0; i < grid->n; ++i) f[i] = v0.u[i] - hyperbolic_h(grid->r(i));
    for (double v : poisson_zero_dirichlet(f, *grid)) CHECK(v <= 1e-15);
  }
  SUBCASE("psi stays nonpositive along the flow") {
    // up to a rim excursion that shrinks under refinement (the integrand
    // carries a (dr/eps)^2 stencil floor near the trace)
    double excursion[2];
    int idx = 0;
    for (int n : {128, 256}) {
      const auto run = run_bump(n, 0.3, n == 128 ? 2e-3 : 5e-4);
      double worst = 0.0;
      for (const auto& psi_k : run.psi.psi)
        for (double v : psi_k) worst = std::max(worst, v);
      excursion[idx++] = worst;
    }
    CHECK(excursion[0] <= 2e-3);
    CHECK(excursion[1] < 0.5 * excursion[0]);
  }
  SUBCASE("annulus grids are rejected") {
    auto ann = std::make_shared<const RadialGrid>(32, 1.0 / 64.0, 0.5);
    std::vector<double> f(ann->n, 1.0);
    CHECK_THROWS_AS(poisson_zero_dirichlet(f, *ann), std::invalid_argument);
  }
}

TEST_CASE("disk Poisson solve") {
  auto grid = std::make_shared<const DiskGrid>(64, 1.0 / 16.0);
  const auto f = sample_xy(grid, [](double x, double y) {
    return std::exp(-8.0 * (x * x + y * y));
  });
  const auto psi = poisson_zero_dirichlet(f.u, *grid);
  // the 5-point residual must match the source to the CG tolerance
  const auto lap = laplacian(psi, *grid);
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < grid->size(); ++k) {
    if (!grid->interior[k]) {
      CHECK(psi[k] == 0.0);  // zero rim trace
      continue;
    }
    bool rim_neighbor = false;
    for (int q = 0; q < 4; ++q)
      if (!grid->interior[grid->nbr[k][q]]) rim_neighbor = true;
    if (rim_neighbor) continue;
    worst = std::max(worst, std::abs(lap[k] - f.u[k]));
    scale = std::max(scale, std::abs(f.u[k]));
  }
  CHECK(worst / scale < 1e-10);
}

TEST_CASE("psi evolution") {
  SUBCASE("the self-similar ray freezes psi") {
    auto grid = make_grid(64);
    Trajectory<RadialGrid> traj;
    traj.grid = grid;
    const auto h = sample(grid, hyperbolic_h);
    for (int k = 0; k <= 10; ++k) {
      const double t = 0.05 * k;
      traj.times.push_back(t);
      std::vector<double> snap(grid->n);
      for (int i = 0; i < grid->n; ++i) snap[i] = (2.0 * t + 1.0) * h.u[i];
      traj.snapshots.push_back(std::move(snap));
    }
    std::vector<double> psi0(grid->n, -0.3);
    const auto st = evolve_psi(psi0, traj);
    for (const auto& psi : st.psi)
      for (double v : psi) CHECK(v == doctest::Approx(-0.3).epsilon(1e-14));
  }
  SUBCASE("Poisson consistency: Delta psi(t) tracks v(t) - (2t+1)h") {
    double err[2];
    int idx = 0;
    for (int n : {128, 256}) {
      const auto run = run_bump(n, 0.2, n == 128 ? 4e-3 : 1e-3);
      const auto h = sample(run.grid, hyperbolic_h);
      const int k = run.traj.steps() - 1;
      const double t = run.traj.times[k];
      const auto lap = laplacian(run.psi.psi[k], run.grid->axis());
      double worst = 0.0;
      for (int i = 0; i < run.grid->n; ++i) {
        if (!std::isfinite(lap[i]) || run.grid->r(i) > 0.8) continue;
        const double target =
            run.traj.snapshots[k][i] - (2.0 * t + 1.0) * h.u[i];
        worst = std::max(worst, std::abs(lap[i] - target));
      }
      err[idx++] = worst;
    }
    CHECK(err[1] < err[0]);
  }
  SUBCASE("the psi integrand vanishes at the rim as eps drops") {
    // d(psi)/dt = log(v/((2t+1)h)) over the rim window [1-2eps, 1-eps]. The
    // window carries a (dr/eps)^2 stencil floor, so the eps ladder oversamples
    // the boundary layer (dr ~ eps^2) to expose the continuum limit.
    double rim[2];
    int idx = 0;
    for (auto [eps, n, dt] : std::vector<std::tuple<double, int, double>>{
             {1.0 / 32.0, 192, 2e-3}, {1.0 / 64.0, 768, 1e-3}}) {
      auto grid = std::make_shared<const RadialGrid>(n, eps);
      auto v0 = bump_v0(grid, 0.6);
      FlowProblem<RadialGrid> prob;
      prob.initial = v0;
      prob.bc = HyperbolicTrace{1.0};
      prob.t_end = 0.2;
      prob.dt = dt;
      const auto traj = solve(prob);
      REQUIRE(!traj.aborted);
      double worst = 0.0;
      for (int k = 1; k < traj.steps(); ++k) {
        const double t = traj.times[k];
        for (int i = 0; i < grid->n; ++i) {
          if (grid->r(i) < 1.0 - 2.0 * eps) continue;
          const double g = std::log(traj.snapshots[k][i]) -
                           std::log((2.0 * t + 1.0) * hyperbolic_h(grid->r(i)));
          worst = std::max(worst, std::abs(g));
        }
      }
      rim[idx++] = worst;
    }
    CHECK(rim[1] < 0.5 * rim[0]);
  }
}

TEST_CASE("Harnack forms") {
  SUBCASE("H(0) = 0 exactly and the self-similar ray gives the rim constant") {
    auto grid = make_grid(64);
    Trajectory<RadialGrid> traj;
    traj.grid = grid;
    const auto h = sample(grid, hyperbolic_h);
    for (int k = 0; k <= 8; ++k) {
      const double t = 0.05 * k;
      traj.times.push_back(t);
      std::vector<double> snap(grid->n);
      for (int i = 0; i < grid->n; ++i) snap[i] = (2.0 * t + 1.0) * h.u[i];
      traj.snapshots.push_back(std::move(snap));
    }
    std::vector<double> psi0(grid->n, 0.0);
    const auto st = evolve_psi(psi0, traj);
    const auto H = harnack(traj, st, HarnackForm::VForm);
    for (double v : H.H[0]) CHECK(v == 0.0);
    for (std::size_t k = 1; k < H.H.size(); ++k) {
      const double expected = 0.5 * std::log(1.0 / (2.0 * traj.times[k] + 1.0));
      for (double v : H.H[k]) CHECK(v == doctest::Approx(expected).epsilon(1e-13));
    }
  }
  SUBCASE("rim value equals the closed form for hyperbolic-trace runs") {
    const auto run = run_bump(128, 0.3, 2e-3);
    const auto H = harnack(run.traj, run.psi);
    for (int k = 1; k < run.traj.steps(); ++k) {
      const double expected =
          0.5 * std::log(1.0 / (2.0 * run.traj.times[k] + 1.0));
      CHECK(H.H[k].back() == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("potential form agrees with the v form at discretization order") {
    double gap[2];
    int idx = 0;
    for (int n : {128, 256}) {
      const double dt = (n == 128) ? 8e-3 : 2e-3;
      const auto run = run_bump(n, 0.2, dt);
      const auto Hv = harnack(run.traj, run.psi, HarnackForm::VForm);
      const auto Hp = harnack(run.traj, run.psi, HarnackForm::PotentialForm);
      double worst = 0.0;
      for (int k = 1; k < run.traj.steps(); ++k)
        for (int i = 0; i < run.grid->n; ++i) {
          if (!std::isfinite(Hp.H[k][i]) || run.grid->r(i) > 0.9) continue;
          worst = std::max(worst, std::abs(Hp.H[k][i] - Hv.H[k][i]));
        }
      gap[idx++] = worst;
    }
    CHECK(gap[0] / gap[1] > 1.5);
    CHECK(gap[1] < 3e-2);
  }
  SUBCASE("H stays nonpositive for the bump run") {
    const auto run = run_bump(192, 0.4, 2e-3);
    const auto H = harnack(run.traj, run.psi);
    double worst = -1.0;
    for (std::size_t k = 1; k < H.H.size(); ++k)
      for (double v : H.H[k]) worst = std::max(worst, v);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("Harnack evolution identity") {
  const auto residual_for = [](int n, double dt) {
    const auto run = run_bump(n, 0.2, dt);
    const auto H = harnack(run.traj, run.psi);
    return harnack_residual(H, run.traj, run.v0.u);
  };
  // dt tied to n^-3: the solver-built residual contracts like dt/dr
  const auto r64 = residual_for(64, 2e-2);
  const auto r128 = residual_for(128, 2.5e-3);
  CHECK(r64.max_abs / r128.max_abs > 2.0);

  // the heat-inequality direction: dH/dt - Delta_v H = residual - v0/v <= 0
  const auto run = run_bump(128, 0.2, 8e-3);
  const auto H = harnack(run.traj, run.psi);
  const auto hr = harnack_residual(H, run.traj, run.v0.u);
  double worst = -1.0;
  for (std::size_t k = 1; k + 1 < hr.times.size(); ++k)
    for (std::size_t i = 0; i < hr.res[k].size(); ++i) {
      if (!std::isfinite(hr.res[k][i])) continue;
      const double v = run.traj.snapshots[k][i];
      worst = std::max(worst, hr.res[k][i] - run.v0.u[i] / v);
    }
  CHECK(worst <= 1e-6);
}

TEST_CASE("phi satisfies d(phi)/dt = log(Delta phi) + 1 discretely") {
  double err[2];
  int idx = 0;
  for (int n : {128, 256}) {
    const double dt = (n == 128) ? 8e-3 : 2e-3;
    const auto run = run_bump(n, 0.2, dt);
    const auto h = sample(run.grid, hyperbolic_h);
    double worst = 0.0;
    for (int k = 1; k + 1 < run.traj.steps(); ++k) {
      const auto phi_m = potential_phi(run.psi, k - 1, h.u);
      const auto phi_0 = potential_phi(run.psi, k, h.u);
      const auto phi_p = potential_phi(run.psi, k + 1, h.u);
      const auto lap = laplacian(phi_0, run.grid->axis());
      const double dt2 = run.traj.times[k + 1] - run.traj.times[k - 1];
      for (int i = 0; i < run.grid->n; ++i) {
        if (!std::isfinite(lap[i]) || lap[i] <= 0.0 || run.grid->r(i) > 0.8)
          continue;
        worst = std::max(worst, std::abs((phi_p[i] - phi_m[i]) / dt2 -
                                         std::log(lap[i]) - 1.0));
      }
    }
    err[idx++] = worst;
  }
  CHECK(err[0] / err[1] > 1.8);
}

TEST_CASE("corollary bounds") {
  SUBCASE("self-similar ray with zero psi passes trivially") {
    auto grid = make_grid(64);
    Trajectory<RadialGrid> traj;
    traj.grid = grid;
    const auto h = sample(grid, hyperbolic_h);
    for (int k = 0; k <= 8; ++k) {
      const double t = 0.05 * k;
      traj.times.push_back(t);
      std::vector<double> snap(grid->n);
      for (int i = 0; i < grid->n; ++i) snap[i] = (2.0 * t + 1.0) * h.u[i];
      traj.snapshots.push_back(std::move(snap));
    }
    std::vector<double> psi0(grid->n, 0.0);
    const auto st = evolve_psi(psi0, traj);
    const auto rep = corollary_bounds(traj, st);
    CHECK(rep.pass);
    CHECK(rep.margin > 0.0);
  }
  SUBCASE("bump runs hold with positive margin, stronger below weaker") {
    const auto run = run_bump(128, 0.3, 2e-3);
    const auto rep = corollary_bounds(run.traj, run.psi);
    CHECK(rep.pass);
    const auto m = corollary_margins(run.traj, run.psi);
    CHECK(m.ordering >= 0.0);
    CHECK(m.strong <= m.weak + 1e-12);
  }
}

TEST_CASE("Brezis-Merle audit") {
  auto grid = make_grid(256);
  SUBCASE("zero source: area against 4 pi") {
    const auto zero = sample(grid, [](double) { return 0.0; });
    const auto rep = brezis_merle_audit(zero, zero, 1.0);
    CHECK(rep.pass);
    CHECK(rep.lhs == doctest::Approx(kPi * grid->outer() * grid->outer())
                         .epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  }
  SUBCASE("the rescaled-potential setup passes inside the p window") {
    const double delta = 0.5;
    const double t_tilde = (1.0 + delta / 2.0) / (4.0 * kPi);
    const double p = 1.0 + delta / 3.0;
    const auto v0 = bump_v0(grid, 0.9);
    const auto h = sample(grid, hyperbolic_h);
    RadialField f{grid, std::vector<double>(grid->n), 0.0};
    for (int i = 0; i < grid->n; ++i) f.u[i] = (v0.u[i] - h.u[i]) / t_tilde;
    RadialField eta{grid, poisson_zero_dirichlet(f.u, *grid), 0.0};
    const auto rep = brezis_merle_audit(eta, f, p);
    CHECK(rep.pass);
    CHECK(rep.margin > 0.0);
  }
  SUBCASE("overflowing integrand reports unbounded at this resolution") {
    const auto f = sample(grid, [](double r) { return std::exp(-4.0 * r * r); });
    const auto eta = sample(grid, [](double r) { return -900.0 * (1.0 - r); });
    const auto rep = brezis_merle_audit(eta, f, 1.0);
    CHECK(!rep.pass);
    CHECK(rep.notes.find("unbounded at this resolution") != std::string::npos);
  }
  SUBCASE("outside the p window: inapplicable, not a failure") {
    const auto one = sample(grid, [](double) { return 2.0; });
    const auto eta = sample(grid, [](double) { return 0.1; });
    // p ||f||_1 = 4.2 pi
    const double p = 4.2 * kPi / lp_norm(one, 1.0);
    const auto rep = brezis_merle_audit(eta, one, p);
    CHECK(rep.pass);
    CHECK(rep.notes.find("inapplicable") != std::string::npos);
  }
}

TEST_CASE("disk-grid potential machinery") {
  // the grid-agnostic pipeline on a coarse Cartesian disk: psi accumulation,
  // both Harnack forms, the identity residual and the corollary margins
  auto grid = std::make_shared<const DiskGrid>(48, 1.0 / 16.0);
  const auto h = sample_metric<DiskGrid>(grid, HyperbolicMetric::full_disk());
  const auto v0 = sample_xy(grid, [](double x, double y) {
    const double r = std::hypot(x, y);
    const double d = (r - 0.25) / 0.12;
    return hyperbolic_h(r) +
           0.8 * std::exp(-0.5 * d * d) * detail::rim_cutoff(r);
  });
  FlowProblem<DiskGrid> prob;
  prob.initial = v0;
  prob.bc = HyperbolicTrace{1.0};
  prob.t_end = 0.1;
  prob.dt = 5e-3;
  const auto traj = solve(prob);
  REQUIRE(!traj.aborted);

  std::vector<double> f(v0.u.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = v0.u[i] - h.u[i];
  const auto psi0 = poisson_zero_dirichlet(f, *grid);
  const auto psi = evolve_psi(psi0, traj);
  const auto Hv = harnack(traj, psi, HarnackForm::VForm);
  const auto Hp = harnack(traj, psi, HarnackForm::PotentialForm);
  double worst_H = -1.0, worst_gap = 0.0;
  for (std::size_t k = 1; k < Hv.H.size(); ++k)
    for (int i = 0; i < grid->size(); ++i) {
      worst_H = std::max(worst_H, Hv.H[k][i]);
      if (std::isfinite(Hp.H[k][i]) && grid->radius(i) < 0.7)
        worst_gap = std::max(worst_gap, std::abs(Hp.H[k][i] - Hv.H[k][i]));
    }
  CHECK(worst_H < 5e-2);   // coarse grid; nonpositivity up to its tolerance
  CHECK(worst_gap < 0.2);  // the two forms track each other
  const auto hr = harnack_residual(Hv, traj, v0.u);
  CHECK(std::isfinite(hr.max_abs));
  const auto rep = corollary_bounds(traj, psi, 5e-2);
  CHECK(rep.pass);
}

TEST_CASE("bootstrap rescale feeds a bounded second pass") {
  const auto run = run_bump(128, 0.2, 2e-3);
  const int last = run.traj.steps() - 1;
  const auto v_t = run.traj.field(last);
  const auto u_tilde = bootstrap_rescale(v_t);
  // closed-form anchors: v = h gives 1 at the origin
  const auto h = sample(run.grid, hyperbolic_h);
  const auto h_rescaled = bootstrap_rescale(h);
  CHECK(h_rescaled.u[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < run.grid->n; ++i) {
    const double expected = 0.25 * hyperbolic_h(0.5 * run.grid->r(i));
    CHECK(h_rescaled.u[i] == doctest::Approx(expected).epsilon(1e-4));
  }
  // the zoomed field stays positive with finite L^p norm (Eq. 2.20 unraveled)
  require_positive(u_tilde.u, "bootstrap");
  const double lp = lp_norm(u_tilde, 1.0 + 0.5 / 3.0);
  CHECK(std::isfinite(lp));
}
