#pragma once

// Closed-form solutions of du/dt = Delta log u: the cigar soliton restricted
// to the disk, its mass-normalized scaling, the self-similar hyperbolic family
// (2t+alpha) h_rho, Moebius pullbacks, and parabolic rescalings. These are the
// solver oracles and the sharpness-experiment substrate.

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "logdiff/geometry.hpp"
#include "logdiff/grid.hpp"

namespace logdiff {

// log(1 + e^d) without overflow.
inline double softplus(double d) {
  if (d > 36.0) return d + std::exp(-d);
  if (d < -36.0) return std::exp(d);
  return std::log1p(std::exp(d));
}

class ExactSolution {
 public:
  enum class Kind { CigarUnscaled, CigarScaled, Hyperbolic, MobiusPullback, Rescaled };

  // 1/(e^{4t} + r^2), the steady cigar soliton.
  static ExactSolution cigar() { return ExactSolution(Kind::CigarUnscaled); }

  // 4 / ( log(1/mu + 1) [ (1+mu)^t mu^{1-t} + r^2 ] ), normalized so the
  // initial L1 mass on the unit disk is exactly 4*pi.
  static ExactSolution cigar_scaled(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("cigar_scaled: mu must be > 0");
    ExactSolution s(Kind::CigarScaled);
    s.mu_ = mu;
    return s;
  }

  // (2t + alpha) h_rho on B_rho.
  static ExactSolution hyperbolic(double alpha, double rho = 1.0) {
    if (!(alpha >= 0.0))
      throw std::invalid_argument("hyperbolic: alpha must be >= 0");
    if (!(rho > 0.0 && rho <= 1.0))
      throw std::invalid_argument("hyperbolic: rho must lie in (0,1]");
    ExactSolution s(Kind::Hyperbolic);
    s.alpha_ = alpha;
    s.rho_ = rho;
    return s;
  }

  // (base o phi) |phi'|^2 at each time slice; the map is time-independent so
  // the pullback commutes with the time derivative. Only disk-domain bases.
  static ExactSolution mobius_pullback(ExactSolution base, MobiusMap map) {
    if (base.domain_radius() < 1.0)
      throw std::invalid_argument(
          "mobius_pullback: base must be defined on the whole disk");
    ExactSolution s(Kind::MobiusPullback);
    s.base_ = std::make_shared<ExactSolution>(std::move(base));
    s.map_ = map;
    return s;
  }

  // w(x,t) = lambda u(x, t/lambda), the parabolic rescaling invariance.
  static ExactSolution rescaled(ExactSolution base, double lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("rescaled: lambda must be > 0");
    ExactSolution s(Kind::Rescaled);
    s.base_ = std::make_shared<ExactSolution>(std::move(base));
    s.lambda_ = lambda;
    return s;
  }

  Kind kind() const { return kind_; }
  double mu() const { return mu_; }
  double alpha() const { return alpha_; }
  double rho() const { return rho_; }

  double domain_radius() const {
    switch (kind_) {
      case Kind::Hyperbolic: return rho_;
      case Kind::MobiusPullback: return 1.0;
      case Kind::Rescaled: return base_->domain_radius();
      default: return 1.0;
    }
  }

  bool is_radial() const {
    switch (kind_) {
      case Kind::MobiusPullback: return std::abs(map_.a) == 0.0;
      case Kind::Rescaled: return base_->is_radial();
      default: return true;
    }
  }

  double eval(const DiskPoint& p, double t) const {
    if (!(t >= 0.0)) throw std::domain_error("ExactSolution: t must be >= 0");
    switch (kind_) {
      case Kind::CigarUnscaled: {
        const double r = p.radius();
        check_domain(r < 1.0, r);
        return 1.0 / (std::exp(4.0 * t) + r * r);
      }
      case Kind::CigarScaled: {
        const double r = p.radius();
        check_domain(r < 1.0, r);
        // log-domain throughout: (1+mu)^t mu^{1-t} underflows long before mu
        // itself does.
        const double lc = t * std::log1p(mu_) + (1.0 - t) * std::log(mu_);
        const double lmass = std::log1p(mu_) - std::log(mu_);  // log(1/mu + 1)
        double ldenom;
        if (r == 0.0) {
          ldenom = lc;
        } else {
          const double lr2 = 2.0 * std::log(r);
          const double m = std::max(lc, lr2);
          ldenom = m + std::log1p(std::exp(std::min(lc, lr2) - m));
        }
        return std::exp(std::log(4.0) - std::log(lmass) - ldenom);
      }
      case Kind::Hyperbolic: {
        const double r = p.radius();
        check_domain(r < rho_, r);
        const double h = rho_ == 1.0
                             ? hyperbolic_h(r)
                             : HyperbolicMetric::sub_ball(rho_).factor(r);
        return (2.0 * t + alpha_) * h;
      }
      case Kind::MobiusPullback: {
        const MobiusImage im = mobius_apply(map_, p);
        return base_->eval(im.point, t) * im.deriv_factor;
      }
      case Kind::Rescaled:
        return lambda_ * base_->eval(p, t / lambda_);
    }
    throw std::logic_error("unreachable");
  }

  double operator()(const DiskPoint& p, double t) const { return eval(p, t); }
  double operator()(double r, double t) const { return eval(DiskPoint{r, 0.0}, t); }

 private:
  explicit ExactSolution(Kind k) : kind_(k) {}
  void check_domain(bool ok, double r) const {
    if (!ok) {
      std::ostringstream msg;
      msg << "ExactSolution: r=" << r << " outside the solution's domain";
      throw std::domain_error(msg.str());
    }
  }

  Kind kind_;
  double mu_ = 0.0;
  double alpha_ = 0.0;
  double rho_ = 1.0;
  double lambda_ = 1.0;
  std::shared_ptr<const ExactSolution> base_;
  MobiusMap map_;
};

// Closed-form L1 mass of the scaled cigar over B_r at time t:
//   4*pi log((c + r^2)/c) / log(1/mu + 1),  c = (1+mu)^t mu^{1-t}.
// Evaluated in log space so mu down to ~1e-300 stays exact.
inline double cigar_l1_mass(double mu, double t, double r) {
  if (!(mu > 0.0)) throw std::invalid_argument("cigar_l1_mass: mu must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("cigar_l1_mass: t must be >= 0");
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("cigar_l1_mass: r must lie in (0,1]");
  const double lc = t * std::log1p(mu) + (1.0 - t) * std::log(mu);
  const double lmass = std::log1p(mu) - std::log(mu);
  const double d = 2.0 * std::log(r) - lc;  // log(r^2/c)
  return 4.0 * kPi * softplus(d) / lmass;
}

// ---------------------------------------------------------------------------
// Discrete PDE residual |du/dt - Delta log u| of a closed-form solution:
// centered time difference against the shared Laplacian stencil. NaN where the
// stencil leaves the node set.

inline std::vector<double> pde_residual(const ExactSolution& sol,
                                        const RadialAxis& ax, double t,
                                        double dt) {
  if (!sol.is_radial())
    throw std::invalid_argument(
        "pde_residual: non-radial solution on a radial axis");
  if (!(t - dt >= 0.0))
    throw std::invalid_argument("pde_residual: need t - dt >= 0");
  std::vector<double> logu(ax.count), up(ax.count), um(ax.count);
  for (int i = 0; i < ax.count; ++i) {
    const double r = ax.r(i);
    logu[i] = std::log(sol(r, t));
    up[i] = sol(r, t + dt);
    um[i] = sol(r, t - dt);
  }
  std::vector<double> lap = laplacian(logu, ax);
  std::vector<double> res(ax.count, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < ax.count; ++i)
    if (std::isfinite(lap[i]))
      res[i] = std::abs((up[i] - um[i]) / (2.0 * dt) - lap[i]);
  return res;
}

inline std::vector<double> pde_residual(const ExactSolution& sol,
                                        const DiskGrid& g, double t,
                                        double dt) {
  if (!(t - dt >= 0.0))
    throw std::invalid_argument("pde_residual: need t - dt >= 0");
  std::vector<double> logu(g.size());
  for (int k = 0; k < g.size(); ++k)
    logu[k] = std::log(sol.eval(DiskPoint{g.x[k], g.y[k]}, t));
  std::vector<double> lap = laplacian(logu, g);
  std::vector<double> res(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < g.size(); ++k) {
    if (!std::isfinite(lap[k])) continue;
    const DiskPoint p{g.x[k], g.y[k]};
    res[k] = std::abs((sol.eval(p, t + dt) - sol.eval(p, t - dt)) / (2.0 * dt) -
                      lap[k]);
  }
  return res;
}

inline double max_finite(std::span<const double> v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

// Residual maxima over a fixed interior region. Solutions built from
// hyperbolic metrics blow up at the excluded rim, where the stencil error
// scales like (dr/(1-r))^2; convergence order is measured away from it.
inline double max_residual_within(std::span<const double> res,
                                  const RadialAxis& ax, double rmax) {
  double m = 0.0;
  for (int i = 0; i < ax.count; ++i)
    if (std::isfinite(res[i]) && ax.r(i) <= rmax)
      m = std::max(m, std::abs(res[i]));
  return m;
}

inline double max_residual_within(std::span<const double> res,
                                  const DiskGrid& g, double rmax) {
  double m = 0.0;
  for (int k = 0; k < g.size(); ++k)
    if (std::isfinite(res[k]) && g.radius(k) <= rmax)
      m = std::max(m, std::abs(res[k]));
  return m;
}

}  // namespace logdiff
