#pragma once

// Grids, sampled fields, quadrature, norms, and the discrete Laplacian shared
// by the flow solver and every estimate audit.
//
// Two grid families:
//   RadialGrid — uniform nodes on [inner, 1-eps]; inner = 0 for the truncated
//                disk (the default), inner > 0 for annulus sub-domains.
//   DiskGrid   — Cartesian cells on [-1,1]^2 masked to center radius <= 1-eps.
//
// The open disk carries metrics blowing up at the rim, so everything computes
// on the eps-truncated domain; convergence in eps is audited separately.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace logdiff {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Radial grids

// Uniformly spaced node set; the stencil/quadrature kernels work on this so
// sub-ball and annulus node sets reuse one implementation.
struct RadialAxis {
  double start = 0.0;
  double step = 0.0;
  int count = 0;

  double r(int i) const { return start + step * i; }
  double end() const { return r(count - 1); }
};

struct RadialGrid {
  RadialGrid(int n_, double eps_, double inner_ = 0.0)
      : n(n_), eps(eps_), inner(inner_) {
    if (n < 16) throw std::invalid_argument("RadialGrid: n must be >= 16");
    if (!(eps > 0.0 && eps <= 0.2))
      throw std::invalid_argument("RadialGrid: eps must lie in (0, 0.2]");
    if (!(inner >= 0.0 && inner < 1.0 - eps))
      throw std::invalid_argument("RadialGrid: inner must lie in [0, 1-eps)");
  }

  int n;
  double eps;
  double inner;  // 0 for the truncated disk; > 0 for an annulus sub-grid

  double outer() const { return 1.0 - eps; }
  double dr() const { return (outer() - inner) / (n - 1); }
  double r(int i) const { return inner + dr() * i; }
  bool is_disk() const { return inner == 0.0; }
  RadialAxis axis() const { return RadialAxis{inner, dr(), n}; }
};

// ---------------------------------------------------------------------------
// Cartesian disk grid

struct DiskGrid {
  DiskGrid(int res_, double eps_) : res(res_), eps(eps_) {
    if (res < 16) throw std::invalid_argument("DiskGrid: res must be >= 16");
    if (!(eps > 0.0 && eps <= 0.2))
      throw std::invalid_argument("DiskGrid: eps must lie in (0, 0.2]");
    dx = 2.0 / res;
    const double rmax = 1.0 - eps;
    cell_id.assign(static_cast<std::size_t>(res) * res, -1);
    for (int j = 0; j < res; ++j) {
      for (int i = 0; i < res; ++i) {
        const double cx = -1.0 + (i + 0.5) * dx;
        const double cy = -1.0 + (j + 0.5) * dx;
        if (std::hypot(cx, cy) <= rmax) {
          cell_id[static_cast<std::size_t>(j) * res + i] =
              static_cast<int>(x.size());
          x.push_back(cx);
          y.push_back(cy);
          ix.push_back(i);
          iy.push_back(j);
        }
      }
    }
    nbr.resize(x.size());
    interior.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      nbr[k] = {id_at(ix[k] - 1, iy[k]), id_at(ix[k] + 1, iy[k]),
                id_at(ix[k], iy[k] - 1), id_at(ix[k], iy[k] + 1)};
      interior[k] = nbr[k][0] >= 0 && nbr[k][1] >= 0 && nbr[k][2] >= 0 &&
                    nbr[k][3] >= 0;
    }
    if (x.empty() || !mask_connected())
      throw std::invalid_argument("DiskGrid: active mask must be connected");
  }

  int res;
  double eps;
  double dx = 0.0;
  std::vector<double> x, y;                // active cell centers
  std::vector<int> ix, iy;                 // lattice indices of active cells
  std::vector<std::array<int, 4>> nbr;     // W,E,S,N active ids; -1 if absent
  std::vector<char> interior;              // all four neighbours active
  std::vector<int> cell_id;                // res*res lookup, -1 when inactive

  int size() const { return static_cast<int>(x.size()); }
  double outer() const { return 1.0 - eps; }
  double radius(int k) const { return std::hypot(x[k], y[k]); }
  int id_at(int i, int j) const {
    if (i < 0 || j < 0 || i >= res || j >= res) return -1;
    return cell_id[static_cast<std::size_t>(j) * res + i];
  }

 private:
  bool mask_connected() const {
    std::vector<char> seen(x.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t visited = 0;
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      ++visited;
      for (int q : nbr[k]) {
        if (q >= 0 && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    return visited == x.size();
  }
};

// ---------------------------------------------------------------------------
// Sampled fields

// The central state object: samples of a conformal factor (or any scalar) on
// one grid at one time. Positivity is required by the operations that need it
// (solver, curvature, logs), not by construction.
template <class Grid>
struct ConformalField {
  std::shared_ptr<const Grid> grid;
  std::vector<double> u;
  double time = 0.0;
};

using RadialField = ConformalField<RadialGrid>;
using DiskField = ConformalField<DiskGrid>;

template <class F>
RadialField sample(std::shared_ptr<const RadialGrid> g, F&& fr, double t = 0.0) {
  RadialField out{std::move(g), {}, t};
  out.u.resize(out.grid->n);
  for (int i = 0; i < out.grid->n; ++i) out.u[i] = fr(out.grid->r(i));
  return out;
}

template <class F>
DiskField sample_xy(std::shared_ptr<const DiskGrid> g, F&& fxy, double t = 0.0) {
  DiskField out{std::move(g), {}, t};
  out.u.resize(out.grid->size());
  for (int k = 0; k < out.grid->size(); ++k)
    out.u[k] = fxy(out.grid->x[k], out.grid->y[k]);
  return out;
}

inline void require_positive(std::span<const double> u, const char* what) {
  for (double v : u)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::domain_error(std::string(what) +
                              ": field must be strictly positive and finite");
}

// ---------------------------------------------------------------------------
// Discrete Laplacian
//
// Radial: f'' + f'/r, conservative second-order stencil; the r=0 limit 2 f''(0)
// enters through a symmetric ghost node. Disk: standard 5-point stencil.
// Entries where the stencil leaves the grid are NaN; callers supplying
// boundary closures (the solver) assemble those rows themselves.

inline std::vector<double> laplacian(std::span<const double> f,
                                     const RadialAxis& ax) {
  if (static_cast<int>(f.size()) != ax.count)
    throw std::invalid_argument("laplacian: field/axis size mismatch");
  const double h = ax.step;
  std::vector<double> out(ax.count, std::numeric_limits<double>::quiet_NaN());
  for (int i = 1; i + 1 < ax.count; ++i) {
    const double r = ax.r(i);
    out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h) +
             (f[i + 1] - f[i - 1]) / (2.0 * h * r);
  }
  if (ax.start == 0.0 && ax.count >= 2) out[0] = 4.0 * (f[1] - f[0]) / (h * h);
  return out;
}

inline std::vector<double> laplacian(const RadialField& f) {
  return laplacian(f.u, f.grid->axis());
}

inline std::vector<double> laplacian(std::span<const double> f,
                                     const DiskGrid& g) {
  if (static_cast<int>(f.size()) != g.size())
    throw std::invalid_argument("laplacian: field/grid size mismatch");
  std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
  const double ih2 = 1.0 / (g.dx * g.dx);
  for (int k = 0; k < g.size(); ++k) {
    if (!g.interior[k]) continue;
    const auto& nb = g.nbr[k];
    out[k] = (f[nb[0]] + f[nb[1]] + f[nb[2]] + f[nb[3]] - 4.0 * f[k]) * ih2;
  }
  return out;
}

inline std::vector<double> laplacian(const DiskField& f) {
  return laplacian(f.u, *f.grid);
}

// ---------------------------------------------------------------------------
// Quadrature
//
// Radial integrals are exact integrals of the piecewise-linear interpolant of
// r -> 2*pi*r*g(r), clipped exactly at a requested region radius (fractional
// final segment). All weights are nonnegative and shared by every norm, which
// keeps discrete Hoelder-type chains exact on the grid.

inline double integrate_radial(std::span<const double> g, const RadialAxis& ax,
                               double rmax = std::numeric_limits<double>::infinity()) {
  if (static_cast<int>(g.size()) != ax.count)
    throw std::invalid_argument("integrate_radial: size mismatch");
  const double hi = std::min(rmax, ax.end());
  if (hi <= ax.start) return 0.0;
  double acc = 0.0;
  for (int i = 0; i + 1 < ax.count; ++i) {
    const double r0 = ax.r(i), r1 = ax.r(i + 1);
    const double g0 = 2.0 * kPi * r0 * g[i];
    const double g1 = 2.0 * kPi * r1 * g[i + 1];
    if (r1 <= hi) {
      acc += 0.5 * (g0 + g1) * (r1 - r0);
    } else {
      if (r0 < hi) {
        const double w = (hi - r0) / (r1 - r0);
        const double gc = g0 + (g1 - g0) * w;
        acc += 0.5 * (g0 + gc) * (hi - r0);
      }
      break;
    }
  }
  return acc;
}

// Area fraction of a cell lying inside radius rho, partial-volume model for a
// locally straight edge. Removes the O(cell) staircase noise of plain
// center-membership in sub-ball integrals.
inline double cell_fraction(double rho, double center_radius, double dx) {
  return std::clamp(0.5 + (rho - center_radius) / dx, 0.0, 1.0);
}

inline double integrate_disk(std::span<const double> g, const DiskGrid& grid,
                             double rmax = std::numeric_limits<double>::infinity()) {
  if (static_cast<int>(g.size()) != grid.size())
    throw std::invalid_argument("integrate_disk: size mismatch");
  const double a = grid.dx * grid.dx;
  double acc = 0.0;
  if (rmax >= grid.outer()) {
    for (int k = 0; k < grid.size(); ++k) acc += g[k];
    return acc * a;
  }
  for (int k = 0; k < grid.size(); ++k) {
    const double w = cell_fraction(rmax, grid.radius(k), grid.dx);
    if (w > 0.0) acc += w * g[k];
  }
  return acc * a;
}

namespace detail {
inline double integrate(std::span<const double> g, const RadialGrid& grid,
                        double rmax) {
  return integrate_radial(g, grid.axis(), rmax);
}
inline double integrate(std::span<const double> g, const DiskGrid& grid,
                        double rmax) {
  return integrate_disk(g, grid, rmax);
}
}  // namespace detail

// (integral |u|^p dA over the region)^(1/p); region = sub-ball radius, with
// infinity meaning the whole truncated domain.
template <class Grid>
double lp_norm(const ConformalField<Grid>& f, double p,
               double region_radius = std::numeric_limits<double>::infinity()) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  std::vector<double> g(f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i)
    g[i] = std::pow(std::abs(f.u[i]), p);
  const double integral = detail::integrate(g, *f.grid, region_radius);
  return std::pow(integral, 1.0 / p);
}

// integral of (u - barrier)_+ dA; the truncated L1 mass controlling waiting
// times in the smoothing theorems.
template <class Grid>
double truncated_l1(const ConformalField<Grid>& f,
                    std::span<const double> barrier) {
  if (barrier.size() != f.u.size())
    throw std::invalid_argument("truncated_l1: barrier size mismatch");
  std::vector<double> g(f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i)
    g[i] = std::max(f.u[i] - barrier[i], 0.0);
  return detail::integrate(g, *f.grid,
                           std::numeric_limits<double>::infinity());
}

template <class Grid>
double truncated_l1(const ConformalField<Grid>& f, double k) {
  std::vector<double> g(f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i)
    g[i] = std::max(f.u[i] - k, 0.0);
  return detail::integrate(g, *f.grid,
                           std::numeric_limits<double>::infinity());
}

// ---------------------------------------------------------------------------
// Region suprema

// Radial fields additionally take the interpolated value at the region rim so
// the reported sup does not jitter with node placement.
inline double sup_region(const RadialField& f, double region_radius) {
  const auto& g = *f.grid;
  if (region_radius < g.inner)
    throw std::invalid_argument("sup_region: empty region");
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.n; ++i) {
    if (g.r(i) <= region_radius) m = std::max(m, f.u[i]);
  }
  if (region_radius < g.outer()) {
    const int j = std::min(static_cast<int>((region_radius - g.inner) / g.dr()),
                           g.n - 2);
    const double w = (region_radius - g.r(j)) / g.dr();
    m = std::max(m, f.u[j] + (f.u[j + 1] - f.u[j]) * w);
  }
  if (!std::isfinite(m)) throw std::invalid_argument("sup_region: empty region");
  return m;
}

inline double sup_region(const DiskField& f, double region_radius) {
  double m = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < f.grid->size(); ++k)
    if (f.grid->radius(k) <= region_radius) m = std::max(m, f.u[k]);
  if (!std::isfinite(m)) throw std::invalid_argument("sup_region: empty region");
  return m;
}

// ---------------------------------------------------------------------------
// Snapshot CSV (full double precision, 17 significant digits)

inline void write_csv(const RadialField& f, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot open csv file: " + path);
  std::fprintf(out, "r,u\n");
  for (int i = 0; i < f.grid->n; ++i)
    std::fprintf(out, "%.17g,%.17g\n", f.grid->r(i), f.u[i]);
  std::fclose(out);
}

inline void write_csv(const DiskField& f, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot open csv file: " + path);
  std::fprintf(out, "x,y,u\n");
  for (int k = 0; k < f.grid->size(); ++k)
    std::fprintf(out, "%.17g,%.17g,%.17g\n", f.grid->x[k], f.grid->y[k],
                 f.u[k]);
  std::fclose(out);
}

}  // namespace logdiff
