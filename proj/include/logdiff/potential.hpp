#pragma once

// Potential / Harnack machinery.
//
// psi(0) solves Delta psi = v0 - h with zero rim trace; psi(t) is then the
// time accumulation of log(v/((2s+1)h)), mirroring the construction by time
// integration. The discrete Poisson identity Delta psi(t) = v(t) - (2t+1)h is
// a nontrivial cross-validation, not an input. The Harnack quantity
//   H = t log(v/((2t+1)h)) - [psi(t)-psi(0)] + (1/2) log(1/(2t+1))
// is a subsolution of the v-heat equation and stays nonpositive; its rim value
// is exactly (1/2) log(1/(2t+1)).

#include <cmath>
#include <span>
#include <vector>

#include "logdiff/geometry.hpp"
#include "logdiff/grid.hpp"
#include "logdiff/report.hpp"
#include "logdiff/solver.hpp"

namespace logdiff {

// ---------------------------------------------------------------------------
// Poisson solves with zero rim trace

// Radial closed form: psi(r) = -int_r^R F(s)/s ds, F(s) = int_0^s f(tau) tau dtau.
inline std::vector<double> poisson_zero_dirichlet(std::span<const double> f,
                                                  const RadialGrid& g) {
  if (!g.is_disk())
    throw std::invalid_argument(
        "poisson_zero_dirichlet: radial solve needs a disk grid (inner = 0)");
  if (static_cast<int>(f.size()) != g.n)
    throw std::invalid_argument("poisson_zero_dirichlet: size mismatch");
  const int n = g.n;
  const double h = g.dr();
  std::vector<double> F(n, 0.0);
  for (int i = 1; i < n; ++i)
    F[i] = F[i - 1] + 0.5 * (f[i - 1] * g.r(i - 1) + f[i] * g.r(i)) * h;
  std::vector<double> integ(n, 0.0);
  for (int i = 1; i < n; ++i) integ[i] = F[i] / g.r(i);  // F = O(r^2) at 0
  std::vector<double> psi(n, 0.0);
  for (int i = n - 2; i >= 0; --i)
    psi[i] = psi[i + 1] - 0.5 * (integ[i] + integ[i + 1]) * h;
  return psi;
}

// Disk grids: conjugate-gradient solve of the 5-point system, zero trace on
// the rim cells, relative residual <= 1e-12.
inline std::vector<double> poisson_zero_dirichlet(std::span<const double> f,
                                                  const DiskGrid& g) {
  if (static_cast<int>(f.size()) != g.size())
    throw std::invalid_argument("poisson_zero_dirichlet: size mismatch");
  const int N = g.size();
  const double ih2 = 1.0 / (g.dx * g.dx);
  std::vector<int> unknown;
  for (int k = 0; k < N; ++k)
    if (g.interior[k]) unknown.push_back(k);
  const int m = static_cast<int>(unknown.size());

  // Solve -Delta psi = -f (SPD form), psi = 0 on rim cells.
  std::vector<double> vfull(N, 0.0);
  const auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (int j = 0; j < m; ++j) vfull[unknown[j]] = v[j];
    for (int j = 0; j < m; ++j) {
      const int k = unknown[j];
      const auto& nb = g.nbr[k];
      double lap = -4.0 * vfull[k];
      for (int q = 0; q < 4; ++q)
        if (g.interior[nb[q]]) lap += vfull[nb[q]];
      out[j] = -lap * ih2;
    }
    for (int j = 0; j < m; ++j) vfull[unknown[j]] = 0.0;
  };

  std::vector<double> x(m, 0.0), r(m), p(m), Ap(m);
  for (int j = 0; j < m; ++j) r[j] = -f[unknown[j]];
  double rr = 0.0;
  for (int j = 0; j < m; ++j) rr += r[j] * r[j];
  const double tol2 = std::max(rr * 1e-24, 1e-300);
  p = r;
  for (int it = 0; it < 40 * g.res && rr > tol2; ++it) {
    apply(p, Ap);
    double pAp = 0.0;
    for (int j = 0; j < m; ++j) pAp += p[j] * Ap[j];
    const double a = rr / pAp;
    double rrn = 0.0;
    for (int j = 0; j < m; ++j) {
      x[j] += a * p[j];
      r[j] -= a * Ap[j];
      rrn += r[j] * r[j];
    }
    const double beta = rrn / rr;
    rr = rrn;
    for (int j = 0; j < m; ++j) p[j] = r[j] + beta * p[j];
  }
  std::vector<double> psi(N, 0.0);
  for (int j = 0; j < m; ++j) psi[unknown[j]] = x[j];
  return psi;
}

// ---------------------------------------------------------------------------
// psi(t) by trapezoid accumulation of log(v/((2s+1)h)) over solver snapshots.

struct PotentialState {
  std::vector<double> times;
  std::vector<std::vector<double>> psi;  // psi[k] at times[k]; psi[0] = psi0
  std::vector<double> psi0;
};

template <class Grid>
PotentialState evolve_psi(std::span<const double> psi0,
                          const Trajectory<Grid>& traj) {
  PotentialState st;
  st.times = traj.times;
  st.psi0.assign(psi0.begin(), psi0.end());
  const auto h = sample_metric<Grid>(traj.grid, HyperbolicMetric::full_disk());
  const std::size_t N = psi0.size();

  const auto integrand = [&](int k, std::vector<double>& g) {
    const double t = traj.times[k];
    for (std::size_t i = 0; i < N; ++i)
      g[i] = std::log(traj.snapshots[k][i]) - std::log((2.0 * t + 1.0) * h.u[i]);
  };

  std::vector<double> g_prev(N), g_cur(N), acc(psi0.begin(), psi0.end());
  st.psi.push_back(acc);
  if (traj.steps() <= 1) return st;
  integrand(0, g_prev);
  for (int k = 1; k < traj.steps(); ++k) {
    integrand(k, g_cur);
    const double dt = traj.times[k] - traj.times[k - 1];
    for (std::size_t i = 0; i < N; ++i)
      acc[i] += 0.5 * dt * (g_prev[i] + g_cur[i]);
    st.psi.push_back(acc);
    g_prev.swap(g_cur);
  }
  return st;
}

// phi(t) = psi(t) + (t + 1/2) log((2t+1) h); Delta phi = v and
// d(phi)/dt = log(Delta phi) + 1 hold in the continuum and are audited
// discretely.
inline std::vector<double> potential_phi(const PotentialState& st, int k,
                                         std::span<const double> h) {
  const double t = st.times[k];
  std::vector<double> phi(st.psi[k].size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    phi[i] = st.psi[k][i] + (t + 0.5) * std::log((2.0 * t + 1.0) * h[i]);
  return phi;
}

// ---------------------------------------------------------------------------
// Harnack quantity

enum class HarnackForm { VForm, PotentialForm };

struct HarnackField {
  HarnackForm form = HarnackForm::VForm;
  std::vector<double> times;
  std::vector<std::vector<double>> H;
};

// VForm evaluates the boundary-safe expression in terms of v and psi and is
// defined at every node; PotentialForm evaluates t log(Delta phi) - [phi(t) -
// phi(0)] with the *discrete* Laplacian of phi = psi + (t+1/2) log((2t+1)h),
// so agreement between the two forms cross-validates Delta phi = v. Potential
// form entries are NaN where the stencil (or positivity of Delta phi) fails.
template <class Grid>
HarnackField harnack(const Trajectory<Grid>& traj, const PotentialState& psi,
                     HarnackForm form = HarnackForm::VForm) {
  if (psi.times.size() != traj.times.size())
    throw std::invalid_argument("harnack: inconsistent time grids");
  HarnackField out;
  out.form = form;
  out.times = traj.times;
  const auto h = sample_metric<Grid>(traj.grid, HyperbolicMetric::full_disk());
  const std::size_t N = h.u.size();

  for (int k = 0; k < traj.steps(); ++k) {
    const double t = traj.times[k];
    std::vector<double> H(N, 0.0);
    if (k == 0) {
      out.H.push_back(std::move(H));  // H(0) = 0 exactly
      continue;
    }
    if (form == HarnackForm::VForm) {
      for (std::size_t i = 0; i < N; ++i) {
        const double ratio =
            std::log(traj.snapshots[k][i]) - std::log((2.0 * t + 1.0) * h.u[i]);
        H[i] = t * ratio - (psi.psi[k][i] - psi.psi0[i]) +
               0.5 * std::log(1.0 / (2.0 * t + 1.0));
      }
    } else {
      std::vector<double> phi_t(N), phi_0(N);
      for (std::size_t i = 0; i < N; ++i) {
        phi_t[i] = psi.psi[k][i] +
                   (t + 0.5) * std::log((2.0 * t + 1.0) * h.u[i]);
        phi_0[i] = psi.psi0[i] + 0.5 * std::log(h.u[i]);
      }
      std::vector<double> lap;
      if constexpr (std::is_same_v<Grid, RadialGrid>) {
        lap = laplacian(std::span<const double>(phi_t), traj.grid->axis());
      } else {
        lap = laplacian(std::span<const double>(phi_t), *traj.grid);
      }
      for (std::size_t i = 0; i < N; ++i) {
        if (std::isfinite(lap[i]) && lap[i] > 0.0)
          H[i] = t * std::log(lap[i]) - (phi_t[i] - phi_0[i]);
        else
          H[i] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.H.push_back(std::move(H));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evolution identity residual: dH/dt - (1/v) Delta H + v0/v, which vanishes
// exactly in the continuum. Centered time differences; NaN at the first/last
// times and non-interior nodes.

struct HarnackResidual {
  std::vector<double> times;
  std::vector<std::vector<double>> res;
  double max_abs = 0.0;
};

template <class Grid>
HarnackResidual harnack_residual(const HarnackField& Hf,
                                 const Trajectory<Grid>& traj,
                                 std::span<const double> v0) {
  if (Hf.times.size() < 3)
    throw std::invalid_argument("harnack_residual: need at least 3 snapshots");
  HarnackResidual out;
  out.times = Hf.times;
  const std::size_t N = v0.size();
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  out.res.assign(Hf.times.size(), std::vector<double>(N, nan));
  for (std::size_t k = 1; k + 1 < Hf.times.size(); ++k) {
    std::vector<double> lap;
    if constexpr (std::is_same_v<Grid, RadialGrid>) {
      lap = laplacian(std::span<const double>(Hf.H[k]), traj.grid->axis());
    } else {
      lap = laplacian(std::span<const double>(Hf.H[k]), *traj.grid);
    }
    const double dt2 = Hf.times[k + 1] - Hf.times[k - 1];
    for (std::size_t i = 0; i < N; ++i) {
      if (!std::isfinite(lap[i])) continue;
      const double v = traj.snapshots[k][i];
      const double r = (Hf.H[k + 1][i] - Hf.H[k - 1][i]) / dt2 -
                       lap[i] / v + v0[i] / v;
      out.res[k][i] = r;
      out.max_abs = std::max(out.max_abs, std::abs(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corollary bounds:  v/((2t+1)h) <= exp(1 - psi(0)/t)   (weaker) and
//                    <= (1+2t)^{1/(2t)} exp([psi(t)-psi(0)]/t)   (stronger).
// Audited in log scale: exp(-psi(0)/t) overflows at the first snapshots.

struct CorollaryMargins {
  double weak = std::numeric_limits<double>::infinity();
  double strong = std::numeric_limits<double>::infinity();
  double ordering = std::numeric_limits<double>::infinity();  // weak - strong rhs
};

template <class Grid>
CorollaryMargins corollary_margins(const Trajectory<Grid>& traj,
                                   const PotentialState& psi) {
  const auto h = sample_metric<Grid>(traj.grid, HyperbolicMetric::full_disk());
  CorollaryMargins m;
  for (int k = 1; k < traj.steps(); ++k) {
    const double t = traj.times[k];
    for (std::size_t i = 0; i < h.u.size(); ++i) {
      const double lhs =
          std::log(traj.snapshots[k][i]) - std::log((2.0 * t + 1.0) * h.u[i]);
      const double weak_rhs = 1.0 - psi.psi0[i] / t;
      const double strong_rhs = std::log1p(2.0 * t) / (2.0 * t) +
                                (psi.psi[k][i] - psi.psi0[i]) / t;
      m.weak = std::min(m.weak, weak_rhs - lhs);
      m.strong = std::min(m.strong, strong_rhs - lhs);
      m.ordering = std::min(m.ordering, weak_rhs - strong_rhs);
    }
  }
  return m;
}

template <class Grid>
CheckReport corollary_bounds(const Trajectory<Grid>& traj,
                             const PotentialState& psi, double tol = 1e-6) {
  const CorollaryMargins m = corollary_margins(traj, psi);
  CheckReport rep;
  rep.name = "harnack_sup_bounds";
  rep.lhs = m.strong;
  rep.rhs = m.weak;
  rep.margin = std::min({m.weak, m.strong, m.ordering});
  rep.tolerance = tol;
  rep.pass = m.weak >= -tol && m.strong >= -tol && m.ordering >= -1e-9;
  rep.notes =
      "log-scale margins: lhs = min stronger-bound margin, rhs = min "
      "weaker-bound margin; ordering (weak rhs >= strong rhs) checked too";
  return rep;
}

// ---------------------------------------------------------------------------
// Brezis-Merle audit: for Delta eta = f with zero rim trace and
// 0 < p < 4*pi/||f||_1,  int_B e^{p|eta|} <= 16 pi^2 (4 pi - p ||f||_1)^{-1}.

template <class Grid>
CheckReport brezis_merle_audit(const ConformalField<Grid>& eta,
                               const ConformalField<Grid>& f, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("brezis_merle_audit: p must be > 0");
  std::vector<double> absf(f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i) absf[i] = std::abs(f.u[i]);
  const double f_l1 = detail::integrate(absf, *f.grid,
                                        std::numeric_limits<double>::infinity());
  CheckReport rep;
  rep.name = "brezis_merle";
  rep.tolerance = 0.0;

  if (!(p * f_l1 < 4.0 * kPi)) {
    // Outside the theorem's window: reported as inapplicable, not a failure.
    rep.pass = true;
    rep.lhs = p * f_l1;
    rep.rhs = 4.0 * kPi;
    rep.margin = 0.0;
    rep.notes = "inapplicable: p outside the window (0, 4pi/||f||_1)";
    return rep;
  }

  bool overflow = false;
  std::vector<double> g(eta.u.size());
  for (std::size_t i = 0; i < eta.u.size(); ++i) {
    const double e = p * std::abs(eta.u[i]);
    if (e > 700.0) {
      overflow = true;
      g[i] = std::exp(700.0);
    } else {
      g[i] = std::exp(e);
    }
  }
  const double lhs = detail::integrate(g, *eta.grid,
                                       std::numeric_limits<double>::infinity());
  const double rhs = 16.0 * kPi * kPi / (4.0 * kPi - p * f_l1);
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.margin = rhs - lhs;
  rep.pass = !overflow && lhs <= rhs;
  {
    std::ostringstream os;
    os << "||f||_1=" << f_l1 << ", p window (0," << 4.0 * kPi / f_l1 << ")";
    if (overflow) os << "; unbounded at this resolution (e^700 clamp hit)";
    rep.notes = os.str();
  }
  return rep;
}

}  // namespace logdiff
