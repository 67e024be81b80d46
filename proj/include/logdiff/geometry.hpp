#pragma once

// Closed-form hyperbolic geometry of the disk: the Poincare metric and its
// sub-ball / punctured / annulus relatives, Moebius automorphisms, conformal
// pullbacks and discrete Gauss curvature. These are the oracles and comparison
// barriers for everything else.

#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <sstream>
#include <vector>

#include "logdiff/grid.hpp"
#include "logdiff/report.hpp"

namespace logdiff {

struct DiskPoint {
  double x = 0.0;
  double y = 0.0;
  double radius() const { return std::hypot(x, y); }
};

inline void require_in_disk(const DiskPoint& p, const char* what) {
  if (!(p.radius() < 1.0))
    throw std::domain_error(std::string(what) + ": point outside the open disk");
}

// sin(pi*y) for y in (0,1) without cancellation near either end.
inline double sin_pi(double y) {
  return y <= 0.5 ? std::sin(kPi * y) : std::sin(kPi * (1.0 - y));
}

// ---------------------------------------------------------------------------
// Hyperbolic metrics
//
// Conformal factors of the complete curvature -1 metrics on: the disk,
//   h    = (2/(1-r^2))^2,
// the sub-ball B_rho,        h_rho = rho^-2 h(r/rho),
// the punctured disk,        h_0   = [1/(r(-log r))]^2,
// the annulus a < r < 1,     h_a   = [pi/((-log a) r sin(pi(-log r)/(-log a)))]^2.
// Factors are evaluated through log-space intermediates: the annulus sine
// argument near 0 or pi otherwise loses all precision at the domain edges.

class HyperbolicMetric {
 public:
  enum class Kind { FullDisk, SubBall, Annulus, Punctured };

  static HyperbolicMetric full_disk() { return {Kind::FullDisk, 0.0}; }
  static HyperbolicMetric sub_ball(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("sub_ball: rho must lie in (0,1)");
    return {Kind::SubBall, rho};
  }
  static HyperbolicMetric annulus(double a) {
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("annulus: a must lie in (0,1)");
    return {Kind::Annulus, a};
  }
  static HyperbolicMetric punctured() { return {Kind::Punctured, 0.0}; }

  Kind kind() const { return kind_; }
  double param() const { return param_; }

  double log_factor(double r) const {
    switch (kind_) {
      case Kind::FullDisk:
        check_domain(r >= 0.0 && r < 1.0, r);
        return 2.0 * (std::log(2.0) - std::log1p(-r * r));
      case Kind::SubBall: {
        check_domain(r >= 0.0 && r < param_, r);
        const double s = r / param_;
        return -2.0 * std::log(param_) + 2.0 * (std::log(2.0) - std::log1p(-s * s));
      }
      case Kind::Punctured:
        check_domain(r > 0.0 && r < 1.0, r);
        return -2.0 * (std::log(r) + std::log(-std::log(r)));
      case Kind::Annulus: {
        check_domain(r > param_ && r < 1.0, r);
        const double la = -std::log(param_);
        const double y = -std::log(r) / la;
        return 2.0 * (std::log(kPi) - std::log(la) - std::log(r) -
                      std::log(sin_pi(y)));
      }
    }
    throw std::logic_error("unreachable");
  }

  double factor(double r) const { return std::exp(log_factor(r)); }

 private:
  HyperbolicMetric(Kind k, double p) : kind_(k), param_(p) {}
  void check_domain(bool ok, double r) const {
    if (!ok) {
      std::ostringstream msg;
      msg << "eval_metric: r=" << r << " outside the metric's domain";
      throw std::domain_error(msg.str());
    }
  }
  Kind kind_;
  double param_;
};

inline double eval_metric(const HyperbolicMetric& m, const DiskPoint& p) {
  return m.factor(p.radius());
}

// Conformal factor of the Poincare metric, the ubiquitous case.
inline double hyperbolic_h(double r) {
  const double d = 2.0 / (1.0 - r * r);
  return d * d;
}

template <class Grid>
ConformalField<Grid> sample_metric(std::shared_ptr<const Grid> g,
                                   const HyperbolicMetric& m, double t = 0.0);

template <>
inline RadialField sample_metric(std::shared_ptr<const RadialGrid> g,
                                 const HyperbolicMetric& m, double t) {
  return sample(std::move(g), [&m](double r) { return m.factor(r); }, t);
}

template <>
inline DiskField sample_metric(std::shared_ptr<const DiskGrid> g,
                               const HyperbolicMetric& m, double t) {
  return sample_xy(
      std::move(g), [&m](double x, double y) { return m.factor(std::hypot(x, y)); },
      t);
}

// ---------------------------------------------------------------------------
// Moebius automorphisms of the disk
//
// z -> e^{i theta} (z - a)/(1 - conj(a) z); hyperbolic isometries, so they fix
// h pointwise under conformal pullback. Composition is never needed here.

struct MobiusMap {
  std::complex<double> a{0.0, 0.0};
  double theta = 0.0;
};

struct MobiusImage {
  DiskPoint point;
  double deriv_factor;  // |phi'(p)|^2
};

inline MobiusImage mobius_apply(const MobiusMap& m, const DiskPoint& p) {
  if (!(std::abs(m.a) < 1.0))
    throw std::invalid_argument("mobius_apply: |a| must be < 1");
  require_in_disk(p, "mobius_apply");
  const std::complex<double> z(p.x, p.y);
  const std::complex<double> denom = 1.0 - std::conj(m.a) * z;
  const std::complex<double> w =
      std::polar(1.0, m.theta) * (z - m.a) / denom;
  const double d = (1.0 - std::norm(m.a)) / std::norm(denom);
  return {DiskPoint{w.real(), w.imag()}, d * d};
}

// (u o phi) |phi'|^2 for a closed-form conformal factor u(DiskPoint).
template <class F>
auto pullback(F u, MobiusMap m) {
  return [u = std::move(u), m](const DiskPoint& p) {
    const MobiusImage im = mobius_apply(m, p);
    return u(im.point) * im.deriv_factor;
  };
}

namespace detail {
// Bilinear interpolation of a disk-grid field. NaN when a corner carrying
// weight sits off the active mask.
inline double interp_disk(const DiskField& f, double X, double Y) {
  const DiskGrid& g = *f.grid;
  const double fi = (X + 1.0) / g.dx - 0.5;
  const double fj = (Y + 1.0) / g.dx - 0.5;
  const int i0 = static_cast<int>(std::floor(fi));
  const int j0 = static_cast<int>(std::floor(fj));
  const double wx = fi - i0, wy = fj - j0;
  const int ids[4] = {g.id_at(i0, j0), g.id_at(i0 + 1, j0), g.id_at(i0, j0 + 1),
                      g.id_at(i0 + 1, j0 + 1)};
  const double w[4] = {(1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy,
                       wx * wy};
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    if (w[q] <= 1e-12) continue;  // zero-weight corners may sit off the mask
    if (ids[q] < 0) return std::numeric_limits<double>::quiet_NaN();
    acc += w[q] * f.u[ids[q]];
  }
  return acc;
}
}  // namespace detail

// Conformal pullback of a sampled field: (u o phi)(c) |phi'(c)|^2 on the same
// grid, with bilinear interpolation at the mapped points. Cells whose image
// leaves the sampled support are flagged NaN (the map can push rim cells past
// the mask).
inline DiskField pullback_conformal(const DiskField& f, const MobiusMap& m) {
  DiskField out{f.grid, std::vector<double>(f.u.size()), f.time};
  for (int k = 0; k < f.grid->size(); ++k) {
    const MobiusImage im =
        mobius_apply(m, DiskPoint{f.grid->x[k], f.grid->y[k]});
    out.u[k] = detail::interp_disk(f, im.point.x, im.point.y) * im.deriv_factor;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discrete Gauss curvature, K = -(Delta log u)/(2u), with the same stencil as
// the solver so residual audits never mix discretizations. Non-interior
// entries are NaN.

template <class Grid>
std::vector<double> gauss_curvature(const ConformalField<Grid>& f) {
  require_positive(f.u, "gauss_curvature");
  std::vector<double> logu(f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i) logu[i] = std::log(f.u[i]);
  std::vector<double> lap;
  if constexpr (std::is_same_v<Grid, RadialGrid>) {
    lap = laplacian(std::span<const double>(logu), f.grid->axis());
  } else {
    lap = laplacian(std::span<const double>(logu), *f.grid);
  }
  std::vector<double> K(f.u.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < f.u.size(); ++i)
    if (std::isfinite(lap[i])) K[i] = -lap[i] / (2.0 * f.u[i]);
  return K;
}

// ---------------------------------------------------------------------------
// Barrier ordering h < h_0 < h_a on the annulus (reducing the domain raises
// the hyperbolic metric). Margins are reported in log scale.

inline CheckReport metric_ordering_check(double a,
                                         std::span<const double> r_samples) {
  const auto h = HyperbolicMetric::full_disk();
  const auto h0 = HyperbolicMetric::punctured();
  const auto ha = HyperbolicMetric::annulus(a);
  double m1 = std::numeric_limits<double>::infinity();
  double m2 = std::numeric_limits<double>::infinity();
  for (double r : r_samples) {
    if (!(r > a && r < 1.0))
      throw std::domain_error("metric_ordering_check: sample outside (a,1)");
    m1 = std::min(m1, h0.log_factor(r) - h.log_factor(r));
    m2 = std::min(m2, ha.log_factor(r) - h0.log_factor(r));
  }
  CheckReport rep;
  rep.name = "metric_ordering.h<h0<ha";
  rep.lhs = m1;
  rep.rhs = m2;
  rep.margin = std::min(m1, m2);
  rep.tolerance = 0.0;
  rep.pass = m1 > 0.0 && m2 > 0.0;
  rep.notes = "lhs/rhs are min log-margins of h<h0 and h0<ha over the samples";
  return rep;
}

// h_{alpha^{-1/2}}(x) = alpha h(alpha^{1/2} x) >= alpha h(x) for alpha >= 1,
// |x| < alpha^{-1/2}. Checks the identity to rounding and the inequality.
inline CheckReport claim2_inequality_check(double alpha,
                                           std::span<const double> r_samples) {
  if (!(alpha >= 1.0))
    throw std::invalid_argument("claim2_inequality_check: alpha must be >= 1");
  const double rho = 1.0 / std::sqrt(alpha);
  const auto h = HyperbolicMetric::full_disk();
  const auto h_rho =
      rho < 1.0 ? HyperbolicMetric::sub_ball(rho) : HyperbolicMetric::full_disk();
  double identity_err = 0.0;
  double ineq_margin = std::numeric_limits<double>::infinity();
  for (double r : r_samples) {
    if (!(r >= 0.0 && r < rho))
      throw std::domain_error("claim2_inequality_check: sample outside B_{alpha^-1/2}");
    const double lhs = h_rho.log_factor(r);
    const double mid = std::log(alpha) + h.log_factor(std::sqrt(alpha) * r);
    const double rhs = std::log(alpha) + h.log_factor(r);
    identity_err = std::max(identity_err, std::abs(lhs - mid));
    ineq_margin = std::min(ineq_margin, mid - rhs);
  }
  CheckReport rep;
  rep.name = "claim2.scaling_inequality";
  rep.lhs = identity_err;
  rep.rhs = ineq_margin;
  rep.margin = ineq_margin;
  rep.tolerance = 1e-12;
  rep.pass = identity_err <= 1e-12 && ineq_margin >= -1e-15;
  rep.notes = "lhs = max |log h_rho - log(alpha h(sqrt(alpha) x))|; "
              "rhs = min log-margin of the displayed inequality";
  return rep;
}

}  // namespace logdiff
