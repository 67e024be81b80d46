#pragma once

// Implicit time integration of du/dt = Delta log u.
//
// Each backward-Euler step solves e^w - u_old = dt * Delta w for w = log u_new
// by damped Newton iteration: positivity is structural in the log variable and
// the diffusivity degeneracy near the rim (1/u small where u is large) is
// harmless to an implicit step. Boundary traces emulate complete
// (maximally stretched) solutions on the truncated domain: the hyperbolic
// trace (2t+alpha) h at r = 1-eps, an annulus trace (2t+1) h_a bracketing the
// truncation error from above, or an exact solution's own trace.

#include <cmath>
#include <filesystem>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "logdiff/exact_solutions.hpp"
#include "logdiff/geometry.hpp"
#include "logdiff/grid.hpp"
#include "logdiff/report.hpp"

namespace logdiff {

// ---------------------------------------------------------------------------
// Boundary strategies

struct ExactTrace {
  ExactSolution sol;
};
struct HyperbolicTrace {
  double alpha = 1.0;  // u(rim, t) = (2t + alpha) h(rim)
};
struct AnnulusTrace {
  double a = 0.5;      // u(rim, t) = (2t + 1) h_a(rim)
};
struct ConstantTrace {
  double value = 1.0;  // constants are steady solutions; handy in tests
};

using BoundaryStrategy =
    std::variant<HyperbolicTrace, ExactTrace, AnnulusTrace, ConstantTrace>;

inline double trace_value(const BoundaryStrategy& bc, const DiskPoint& p,
                          double t) {
  const double v = std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ExactTrace>) {
          return b.sol.eval(p, t);
        } else if constexpr (std::is_same_v<T, HyperbolicTrace>) {
          return (2.0 * t + b.alpha) * hyperbolic_h(p.radius());
        } else if constexpr (std::is_same_v<T, AnnulusTrace>) {
          return (2.0 * t + 1.0) *
                 HyperbolicMetric::annulus(b.a).factor(p.radius());
        } else {
          return b.value;
        }
      },
      bc);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::domain_error("boundary trace must be strictly positive");
  return v;
}

inline std::string describe(const BoundaryStrategy& bc) {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<T, ExactTrace>) {
          os << "exact";
        } else if constexpr (std::is_same_v<T, HyperbolicTrace>) {
          os << "hyperbolic(alpha=" << b.alpha << ")";
        } else if constexpr (std::is_same_v<T, AnnulusTrace>) {
          os << "annulus(a=" << b.a << ")";
        } else {
          os << "constant(" << b.value << ")";
        }
        return os.str();
      },
      bc);
}

// ---------------------------------------------------------------------------
// Problems and trajectories

template <class Grid>
struct FlowProblem {
  ConformalField<Grid> initial;
  BoundaryStrategy bc;
  double t_end = 0.0;
  double dt = 0.0;
  double newton_tol = 1e-10;  // relative to 1 + max(u_old)
  int newton_max_iter = 30;
};

struct StepStats {
  int newton_iters = 0;
  double residual = 0.0;  // final Newton residual (absolute, inf norm)
  int halvings = 0;       // substep recursion depth used
};

template <class Grid>
struct Trajectory {
  std::shared_ptr<const Grid> grid;
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;
  std::vector<StepStats> stats;  // one per recorded step
  bool aborted = false;
  std::string abort_reason;

  int steps() const { return static_cast<int>(times.size()); }
  ConformalField<Grid> field(int k) const {
    return ConformalField<Grid>{grid, snapshots[k], times[k]};
  }
};

struct StepError : std::runtime_error {
  StepError(const std::string& msg, StepStats s)
      : std::runtime_error(msg), stats(s) {}
  StepStats stats;
};

// ---------------------------------------------------------------------------
// Newton kernels

namespace detail {

inline void thomas_solve(std::span<const double> sub, std::span<const double> diag,
                         std::span<const double> sup, std::vector<double>& rhs) {
  const int m = static_cast<int>(rhs.size());
  std::vector<double> c(m);
  double beta = diag[0];
  rhs[0] /= beta;
  for (int i = 1; i < m; ++i) {
    c[i] = sup[i - 1] / beta;
    beta = diag[i] - sub[i] * c[i];
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
  }
  for (int i = m - 2; i >= 0; --i) rhs[i] -= c[i + 1] * rhs[i + 1];
}

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// One backward-Euler step on a radial grid. Returns true on convergence.
inline bool radial_be_step(const RadialGrid& g, const BoundaryStrategy& bc,
                           std::span<const double> u_old, double t_new,
                           double dt, double newton_tol, int max_iter,
                           std::vector<double>& u_new, StepStats& st) {
  const int n = g.n;
  const double h = g.dr();
  const int lo = g.is_disk() ? 0 : 1;
  const int hi = n - 2;
  const int m = hi - lo + 1;

  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = std::log(u_old[i]);
  w[n - 1] = std::log(trace_value(bc, DiskPoint{g.outer(), 0.0}, t_new));
  if (!g.is_disk())
    w[0] = std::log(trace_value(bc, DiskPoint{g.inner, 0.0}, t_new));

  const auto residual = [&](const std::vector<double>& wv,
                            std::vector<double>& F) {
    for (int i = lo; i <= hi; ++i) {
      double Lw;
      if (i == 0) {
        Lw = 4.0 * (wv[1] - wv[0]) / (h * h);
      } else {
        const double r = g.r(i);
        Lw = (wv[i + 1] - 2.0 * wv[i] + wv[i - 1]) / (h * h) +
             (wv[i + 1] - wv[i - 1]) / (2.0 * h * r);
      }
      F[i - lo] = std::exp(wv[i]) - u_old[i] - dt * Lw;
    }
  };

  double scale = 1.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(u_old[i]));
  const double tol_abs = newton_tol * scale;

  std::vector<double> F(m), sub(m), diag(m), sup(m), delta(m), wtrial(n), Ft(m);
  residual(w, F);
  double fnorm = inf_norm(F);
  int iter = 0;
  for (; iter < max_iter && fnorm > tol_abs; ++iter) {
    for (int i = lo; i <= hi; ++i) {
      const int j = i - lo;
      if (i == 0) {
        diag[j] = std::exp(w[i]) + dt * 4.0 / (h * h);
        sub[j] = 0.0;
        sup[j] = (i + 1 <= hi) ? -dt * 4.0 / (h * h) : 0.0;
      } else {
        const double r = g.r(i);
        diag[j] = std::exp(w[i]) + dt * 2.0 / (h * h);
        sub[j] = (i - 1 >= lo) ? -dt * (1.0 / (h * h) - 1.0 / (2.0 * h * r)) : 0.0;
        sup[j] = (i + 1 <= hi) ? -dt * (1.0 / (h * h) + 1.0 / (2.0 * h * r)) : 0.0;
      }
    }
    delta.assign(F.begin(), F.end());
    for (double& d : delta) d = -d;
    thomas_solve(sub, diag, sup, delta);

    // Halve the update until the residual norm decreases (at most 20 times).
    double eta = 1.0;
    bool accepted = false;
    for (int half = 0; half <= 20; ++half) {
      wtrial = w;
      for (int j = 0; j < m; ++j) wtrial[lo + j] += eta * delta[j];
      residual(wtrial, Ft);
      const double ftn = inf_norm(Ft);
      if (ftn < fnorm) {
        w.swap(wtrial);
        F.swap(Ft);
        fnorm = ftn;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
  }
  st.newton_iters += iter;
  st.residual = std::max(st.residual, fnorm);
  if (fnorm > tol_abs) return false;
  u_new.resize(n);
  for (int i = 0; i < n; ++i) u_new[i] = std::exp(w[i]);
  return true;
}

// One backward-Euler step on a disk grid; conjugate gradients (Jacobi
// preconditioned) on the SPD Newton systems.
inline bool disk_be_step(const DiskGrid& g, const BoundaryStrategy& bc,
                         std::span<const double> u_old, double t_new,
                         double dt, double newton_tol, int max_iter,
                         std::vector<double>& u_new, StepStats& st) {
  const int N = g.size();
  const double ih2 = 1.0 / (g.dx * g.dx);

  std::vector<double> w(N);
  for (int k = 0; k < N; ++k) w[k] = std::log(u_old[k]);
  std::vector<int> unknown;
  unknown.reserve(N);
  for (int k = 0; k < N; ++k) {
    if (g.interior[k]) {
      unknown.push_back(k);
    } else {
      w[k] = std::log(trace_value(bc, DiskPoint{g.x[k], g.y[k]}, t_new));
    }
  }
  const int m = static_cast<int>(unknown.size());

  const auto residual = [&](const std::vector<double>& wv,
                            std::vector<double>& F) {
    for (int j = 0; j < m; ++j) {
      const int k = unknown[j];
      const auto& nb = g.nbr[k];
      const double Lw =
          (wv[nb[0]] + wv[nb[1]] + wv[nb[2]] + wv[nb[3]] - 4.0 * wv[k]) * ih2;
      F[j] = std::exp(wv[k]) - u_old[k] - dt * Lw;
    }
  };

  // J v for the current linearization; Dirichlet entries do not move.
  std::vector<double> vfull(N, 0.0);
  const auto apply_jacobian = [&](const std::vector<double>& wv,
                                  const std::vector<double>& v,
                                  std::vector<double>& out) {
    for (int j = 0; j < m; ++j) vfull[unknown[j]] = v[j];
    for (int j = 0; j < m; ++j) {
      const int k = unknown[j];
      const auto& nb = g.nbr[k];
      double lap = -4.0 * vfull[k];
      for (int q = 0; q < 4; ++q)
        if (g.interior[nb[q]]) lap += vfull[nb[q]];
      out[j] = std::exp(wv[k]) * v[j] - dt * lap * ih2;
    }
    for (int j = 0; j < m; ++j) vfull[unknown[j]] = 0.0;
  };

  double scale = 1.0;
  for (int k = 0; k < N; ++k) scale = std::max(scale, std::abs(u_old[k]));
  const double tol_abs = newton_tol * scale;

  std::vector<double> F(m), rhs(m), delta(m), r(m), z(m), p(m), Ap(m),
      wtrial(N), Ft(m);
  residual(w, F);
  double fnorm = inf_norm(F);
  int iter = 0;
  for (; iter < max_iter && fnorm > tol_abs; ++iter) {
    for (int j = 0; j < m; ++j) rhs[j] = -F[j];
    // CG
    std::fill(delta.begin(), delta.end(), 0.0);
    r = rhs;
    double rhs_norm2 = 0.0;
    for (int j = 0; j < m; ++j) rhs_norm2 += rhs[j] * rhs[j];
    const double cg_tol2 = std::max(1e-26 * rhs_norm2, 1e-300);
    std::vector<double> prec(m);
    for (int j = 0; j < m; ++j)
      prec[j] = 1.0 / (std::exp(w[unknown[j]]) + 4.0 * dt * ih2);
    double rz = 0.0;
    for (int j = 0; j < m; ++j) {
      z[j] = prec[j] * r[j];
      rz += r[j] * z[j];
    }
    p = z;
    double rr = rhs_norm2;
    for (int cg = 0; cg < 4000 && rr > cg_tol2; ++cg) {
      apply_jacobian(w, p, Ap);
      double pAp = 0.0;
      for (int j = 0; j < m; ++j) pAp += p[j] * Ap[j];
      const double a = rz / pAp;
      rr = 0.0;
      double rznew = 0.0;
      for (int j = 0; j < m; ++j) {
        delta[j] += a * p[j];
        r[j] -= a * Ap[j];
        z[j] = prec[j] * r[j];
        rr += r[j] * r[j];
        rznew += r[j] * z[j];
      }
      const double beta = rznew / rz;
      rz = rznew;
      for (int j = 0; j < m; ++j) p[j] = z[j] + beta * p[j];
    }

    double eta = 1.0;
    bool accepted = false;
    for (int half = 0; half <= 20; ++half) {
      wtrial = w;
      for (int j = 0; j < m; ++j) wtrial[unknown[j]] += eta * delta[j];
      residual(wtrial, Ft);
      const double ftn = inf_norm(Ft);
      if (ftn < fnorm) {
        w.swap(wtrial);
        F.swap(Ft);
        fnorm = ftn;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
  }
  st.newton_iters += iter;
  st.residual = std::max(st.residual, fnorm);
  if (fnorm > tol_abs) return false;
  u_new.resize(N);
  for (int k = 0; k < N; ++k) u_new[k] = std::exp(w[k]);
  return true;
}

inline bool be_step(const RadialGrid& g, const BoundaryStrategy& bc,
                    std::span<const double> u_old, double t_new, double dt,
                    double tol, int max_iter, std::vector<double>& u_new,
                    StepStats& st) {
  return radial_be_step(g, bc, u_old, t_new, dt, tol, max_iter, u_new, st);
}
inline bool be_step(const DiskGrid& g, const BoundaryStrategy& bc,
                    std::span<const double> u_old, double t_new, double dt,
                    double tol, int max_iter, std::vector<double>& u_new,
                    StepStats& st) {
  return disk_be_step(g, bc, u_old, t_new, dt, tol, max_iter, u_new, st);
}

// Advance from t0 to t1, halving on Newton failure down to (t1-t0)/64.
template <class Grid>
bool advance(const Grid& g, const BoundaryStrategy& bc, std::vector<double>& u,
             double t0, double t1, int depth, double tol, int max_iter,
             StepStats& st) {
  std::vector<double> u_new;
  if (be_step(g, bc, u, t1, t1 - t0, tol, max_iter, u_new, st)) {
    u.swap(u_new);
    return true;
  }
  if (depth >= 6) return false;
  st.halvings = std::max(st.halvings, depth + 1);
  const double tm = 0.5 * (t0 + t1);
  return advance(g, bc, u, t0, tm, depth + 1, tol, max_iter, st) &&
         advance(g, bc, u, tm, t1, depth + 1, tol, max_iter, st);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public stepping API

template <class Grid>
ConformalField<Grid> step(const ConformalField<Grid>& u,
                          const BoundaryStrategy& bc, double dt,
                          double newton_tol = 1e-10, int newton_max_iter = 30,
                          StepStats* stats_out = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  require_positive(u.u, "step");
  StepStats st;
  std::vector<double> u_new;
  const bool ok = detail::be_step(*u.grid, bc, u.u, u.time + dt, dt,
                                  newton_tol, newton_max_iter, u_new, st);
  if (stats_out) *stats_out = st;
  if (!ok) {
    std::ostringstream msg;
    msg << "step: Newton failed to converge (iters=" << st.newton_iters
        << ", residual=" << st.residual << ", t=" << u.time + dt
        << ", dt=" << dt << ")";
    throw StepError(msg.str(), st);
  }
  return ConformalField<Grid>{u.grid, std::move(u_new), u.time + dt};
}

template <class Grid>
Trajectory<Grid> solve(const FlowProblem<Grid>& prob) {
  if (!(prob.dt > 0.0)) throw std::invalid_argument("solve: dt must be > 0");
  if (!(prob.t_end >= 0.0))
    throw std::invalid_argument("solve: t_end must be >= 0");
  if (!(prob.newton_tol > 0.0))
    throw std::invalid_argument("solve: newton_tol must be > 0");
  require_positive(prob.initial.u, "solve");

  const long nsteps = std::lround(prob.t_end / prob.dt);
  if (std::abs(nsteps * prob.dt - prob.t_end) >
      1e-9 * std::max(1.0, prob.t_end))
    throw std::invalid_argument("solve: t_end must be a multiple of dt");

  Trajectory<Grid> traj;
  traj.grid = prob.initial.grid;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(prob.initial.u);

  std::vector<double> u = prob.initial.u;
  for (long k = 0; k < nsteps; ++k) {
    const double t0 = k * prob.dt;
    const double t1 = (k + 1) * prob.dt;
    StepStats st;
    const bool ok = detail::advance(*traj.grid, prob.bc, u, t0, t1, 0,
                                    prob.newton_tol, prob.newton_max_iter, st);
    if (!ok) {
      traj.aborted = true;
      std::ostringstream msg;
      msg << "Newton non-convergence at t=" << t1 << " after dt floor "
          << prob.dt / 64.0;
      traj.abort_reason = msg.str();
      break;
    }
    traj.times.push_back(t1);
    traj.snapshots.push_back(u);
    traj.stats.push_back(st);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Comparison principle audit: once ordered (initially and on the boundary),
// ordered forever. Margin is the worst-case (high - low) over all recorded
// times and nodes.

template <class Grid>
CheckReport comparison_check(const Trajectory<Grid>& lo,
                             const Trajectory<Grid>& hi, double tol = 1e-9) {
  if (lo.steps() != hi.steps())
    throw std::invalid_argument("comparison_check: trajectory length mismatch");
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < lo.steps(); ++k) {
    if (std::abs(lo.times[k] - hi.times[k]) > 1e-12)
      throw std::invalid_argument("comparison_check: time grids differ");
    if (lo.snapshots[k].size() != hi.snapshots[k].size())
      throw std::invalid_argument("comparison_check: grids differ");
    for (std::size_t i = 0; i < lo.snapshots[k].size(); ++i)
      margin = std::min(margin, hi.snapshots[k][i] - lo.snapshots[k][i]);
  }
  CheckReport rep;
  rep.name = "comparison_principle";
  rep.lhs = -margin;
  rep.rhs = tol;
  rep.margin = margin;
  rep.tolerance = tol;
  rep.pass = margin >= -tol;
  rep.notes = "margin = min over times/nodes of (high - low)";
  return rep;
}

// ---------------------------------------------------------------------------
// Trajectory export: one snapshot CSV per recorded time plus a JSON manifest.

template <class Grid>
void export_trajectory(const Trajectory<Grid>& traj, const BoundaryStrategy& bc,
                       double dt, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["times"] = traj.times;
  if constexpr (std::is_same_v<Grid, RadialGrid>) {
    manifest["grid"] = {{"kind", "radial"},
                        {"n", traj.grid->n},
                        {"eps", traj.grid->eps},
                        {"inner", traj.grid->inner}};
  } else {
    manifest["grid"] = {
        {"kind", "disk"}, {"res", traj.grid->res}, {"eps", traj.grid->eps}};
  }
  manifest["bc"] = describe(bc);
  manifest["dt"] = dt;
  nlohmann::ordered_json diag;
  diag["aborted"] = traj.aborted;
  diag["abort_reason"] = traj.abort_reason;
  std::vector<int> iters;
  std::vector<double> res;
  for (const auto& s : traj.stats) {
    iters.push_back(s.newton_iters);
    res.push_back(s.residual);
  }
  diag["newton_iters"] = iters;
  diag["max_residuals"] = res;
  manifest["diagnostics"] = diag;

  std::vector<std::string> files;
  for (int k = 0; k < traj.steps(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%05d.csv", k);
    write_csv(traj.field(k), dir + "/" + name);
    files.emplace_back(name);
  }
  manifest["snapshots"] = files;
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot open manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

}  // namespace logdiff
