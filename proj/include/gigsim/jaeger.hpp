#pragma once

// Bounds on the GIG Levy density
//
//   Q_GIG(x) = 2 e^{-x gamma^2/2} / (pi^2 x) * J(x / (2 delta^2)),
//   J(c)     = int_0^inf e^{-c z^2} / (z |H_nu(z)|^2) dz   (the Jaeger integral),
//
// obtained by replacing z|H_nu(z)|^2 with the piecewise bounds A and B. With
// s = c z0^2 and g(s) = gamma(nu, s)/s^nu, the B-bound integrates to
//
//   J_B(z0) = z0 / (2 H0) * (g(s) + Gamma(1/2, s)/sqrt(s)),
//
// and the A-bound is J_B with the corner (z1, 2/pi). For nu < 1/2,
// Q_A <= Q_GIG <= Q_B; for nu > 1/2 the order reverses.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gigsim/errors.hpp"
#include "gigsim/gig.hpp"
#include "gigsim/hankel_bounds.hpp"
#include "gigsim/special_functions.hpp"

namespace gigsim {

struct QuadratureResult {
  double value;
  double error;  // estimated absolute error
};

namespace detail {

inline double levy_prefactor(const GigParams& p, double x) {
  return 2.0 * std::exp(-0.5 * x * p.gamma * p.gamma) / (kPi * kPi * x);
}

inline double jaeger_c(const GigParams& p, double x) { return x / (2.0 * p.delta * p.delta); }

inline void check_bounds_args(const GigParams& p, double x, const char* who) {
  validate(p);
  if (!(p.delta > 0.0)) throw DomainError(std::string(who) + ": requires delta > 0");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(who) + ": x must be positive and finite");
}

// z0 / (2 H0) * (g(s) + Gamma(1/2, s)/sqrt(s)).
inline double jaeger_corner_value(double nu, double c, double z0, double h0) {
  const double s = c * z0 * z0;
  return z0 / (2.0 * h0) * (scaled_lower_gamma(nu, s) + scaled_upper_gamma(0.5, s));
}

}  // namespace detail

/// J(c) by Gauss-Kronrod in t = log z, where the integrand e^{-c e^{2t}} /
/// |H_nu(e^t)|^2 decays like e^{2 nu t} on the left and like a Gaussian in
/// e^t on the right. The far-left tail uses the small-z law
/// |H_nu(z)|^2 ~ (Gamma(nu)/pi)^2 (2/z)^{2 nu}.
inline QuadratureResult jaeger_integral(BesselOrder order, double c, double rel_tol = 1e-12) {
  const double nu = order.value();
  if (!(nu > 0.0)) throw DomainError("jaeger_integral: requires nu > 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("jaeger_integral: c must be positive and finite");

  auto f = [&](double t) {
    const double z = std::exp(t);
    const double damp = std::exp(-c * z * z);
    return damp == 0.0 ? 0.0 : damp / hankel_sq(order, z);
  };
  const double t_mid = -0.5 * std::log(c);
  const double t_a = std::min(0.0, t_mid);
  const double t_b = std::max(0.0, t_mid);
  const double t_lo = t_a - 16.0 / nu;
  const double t_hi = std::max(t_mid + 0.5 * std::log(45.0), t_b);

  const double log_k = 2.0 * (log_gamma(nu) - std::log(detail::kPi)) + 2.0 * nu * std::numbers::ln2;
  double value = std::exp(2.0 * nu * t_lo - log_k) / (2.0 * nu);
  double abs_err = 0.0;
  double l1 = 0.0;
  const std::array<double, 4> pts = {t_lo, t_a, t_b, t_hi};
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    double err = 0.0;
    double seg_l1 = 0.0;
    value += GK::integrate(f, pts[i], pts[i + 1], 20, rel_tol, &err, &seg_l1);
    abs_err += err;
    l1 += seg_l1;
  }
  if (!(abs_err <= 1e-3 * std::abs(value)) || !std::isfinite(value)) {
    throw NumericalError("jaeger_integral: quadrature reached only relative accuracy " +
                         std::to_string(abs_err / std::abs(value)));
  }
  return {value, abs_err};
}

/// Quadrature reference for Q_GIG(x) (without the lambda > 0 gamma term).
inline double q_gig_reference(const GigParams& p, double x) {
  detail::check_bounds_args(p, x, "q_gig_reference");
  return detail::levy_prefactor(p, x) * jaeger_integral(p.order(), detail::jaeger_c(p, x)).value;
}

/// delta Gamma(1/2) e^{-x gamma^2/2} / (sqrt(2) pi x^{3/2}): an upper bound on
/// Q_GIG for |lambda| >= 1/2 and a lower bound for |lambda| <= 1/2.
inline double simple_bound(const GigParams& p, double x) {
  detail::check_bounds_args(p, x, "simple_bound");
  return p.delta * detail::kSqrtPi * std::exp(-0.5 * x * p.gamma * p.gamma) /
         (std::numbers::sqrt2 * detail::kPi * x * std::sqrt(x));
}

/// Q_B(x; z0), the bound with z|H|^2 replaced by B through (z0, H0(z0)).
inline double q_b(const GigParams& p, double x, double z0) {
  detail::check_bounds_args(p, x, "q_b");
  if (!(z0 > 0.0) || !std::isfinite(z0)) throw DomainError("q_b: z0 must be positive");
  if (p.nu() == 0.5) return simple_bound(p, x);
  const CornerPoint c = make_corner_point(p.order(), z0);
  return detail::levy_prefactor(p, x) * detail::jaeger_corner_value(p.nu(), detail::jaeger_c(p, x), c.z0, c.h0);
}

/// Q_A(x), the bound with z|H|^2 replaced by A.
inline double q_a(const GigParams& p, double x) {
  detail::check_bounds_args(p, x, "q_a");
  if (p.nu() == 0.5) return simple_bound(p, x);
  const double z1 = corner_z1(p.order());
  return detail::levy_prefactor(p, x) *
         detail::jaeger_corner_value(p.nu(), detail::jaeger_c(p, x), z1, 2.0 / detail::kPi);
}

/// Result of optimizing a bound over log z0.
struct CornerOptimum {
  double value;
  double z0;
  bool boundary_hit;       // optimum at an end of the search range
  int scan_local_optima;   // local optima seen by the coarse scan
};

namespace detail {

// Maximizes f over log z0 in [log lo, log hi]: 32-point scan, then golden
// section on the bracket around the best scan point.
template <class F>
CornerOptimum maximize_log_corner(F&& f, double lo, double hi) {
  constexpr int kScan = 32;
  const double a = std::log(lo);
  const double b = std::log(hi);
  std::array<double, kScan> ys{};
  std::array<double, kScan> vs{};
  int best = 0;
  for (int i = 0; i < kScan; ++i) {
    ys[i] = a + (b - a) * i / (kScan - 1);
    vs[i] = f(std::exp(ys[i]));
    if (vs[i] > vs[best]) best = i;
  }
  int optima = 0;
  for (int i = 0; i < kScan; ++i) {
    const bool left = i == 0 || vs[i] > vs[i - 1];
    const bool right = i == kScan - 1 || vs[i] >= vs[i + 1];
    if (left && right) ++optima;
  }
  double l = ys[std::max(best - 1, 0)];
  double r = ys[std::min(best + 1, kScan - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double m1 = r - inv_phi * (r - l);
  double m2 = l + inv_phi * (r - l);
  double f1 = f(std::exp(m1));
  double f2 = f(std::exp(m2));
  while (r - l > 1e-6) {
    if (f1 < f2) {
      l = m1;
      m1 = m2;
      f1 = f2;
      m2 = l + inv_phi * (r - l);
      f2 = f(std::exp(m2));
    } else {
      r = m2;
      m2 = m1;
      f2 = f1;
      m1 = r - inv_phi * (r - l);
      f1 = f(std::exp(m1));
    }
  }
  double y = 0.5 * (l + r);
  double v = f(std::exp(y));
  if (vs[best] > v) {
    y = ys[best];
    v = vs[best];
  }
  const bool boundary = y - a < 1e-3 || b - y < 1e-3;
  return {v, std::exp(y), boundary, optima};
}

}  // namespace detail

/// Q_B*(x): Q_B minimized over z0 for |lambda| < 1/2 (tightest upper bound)
/// or maximized for |lambda| > 1/2 (tightest lower bound), z0 in
/// [1e-4 z1, 1e4 z1].
inline CornerOptimum q_b_optimized(const GigParams& p, double x) {
  detail::check_bounds_args(p, x, "q_b_optimized");
  if (p.nu() == 0.5) throw DomainError("q_b_optimized: the bound does not depend on z0 at |lambda| = 1/2");
  const double z1 = corner_z1(p.order());
  const double sign = p.nu() < 0.5 ? -1.0 : 1.0;
  CornerOptimum opt =
      detail::maximize_log_corner([&](double z0) { return sign * q_b(p, x, z0); }, 1e-4 * z1, 1e4 * z1);
  opt.value *= sign;
  return opt;
}

/// Bounds on the mean acceptance rho(x) of the |lambda| > 1/2 sampler.
struct RhoBounds {
  double lower;  // best over z0
  double upper;
  double z0_star;
};

namespace detail {

// (sqrt(s) g(s) + Gamma(1/2, s)) / sqrt(pi), s = c z0^2.
inline double rho_kernel(double nu, double c, double z0) {
  const double s = c * z0 * z0;
  return (std::sqrt(s) * scaled_lower_gamma(nu, s) + upper_inc_gamma(0.5, s)) / kSqrtPi;
}

}  // namespace detail

/// Lower bound on rho(x) through the corner z0.
inline double rho_lower_at(const GigParams& p, double x, double z0) {
  detail::check_bounds_args(p, x, "rho_lower_at");
  const CornerPoint c = make_corner_point(p.order(), z0);
  return 2.0 / (detail::kPi * c.h0) * detail::rho_kernel(p.nu(), detail::jaeger_c(p, x), z0);
}

/// Upper bound on rho(x), the A-bound counterpart (corner z1, H0 = 2/pi).
inline double rho_upper(const GigParams& p, double x) {
  detail::check_bounds_args(p, x, "rho_upper");
  return detail::rho_kernel(p.nu(), detail::jaeger_c(p, x), corner_z1(p.order()));
}

inline RhoBounds rho_bounds_high(const GigParams& p, double x) {
  detail::check_bounds_args(p, x, "rho_bounds_high");
  if (!(p.nu() > 0.5)) throw RegimeError("rho_bounds_high: requires |lambda| > 0.5");
  const double z1 = corner_z1(p.order());
  const CornerOptimum opt =
      detail::maximize_log_corner([&](double z0) { return rho_lower_at(p, x, z0); }, 1e-4 * z1, 1e4 * z1);
  return {opt.value, rho_upper(p, x), opt.z0};
}

/// Rows of Q_A, Q_B*, the simple bound and the quadrature reference.
struct BoundTable {
  std::vector<double> xs;
  std::vector<double> qa;
  std::vector<double> qb_star;
  std::vector<double> simple;
  std::vector<double> q_ref;
  std::vector<double> z0_star;
  int boundary_hits = 0;
  int multimodal_scans = 0;
};

inline BoundTable build_bound_table(const GigParams& p, const std::vector<double>& xs) {
  BoundTable t;
  t.xs = xs;
  for (double x : xs) {
    t.qa.push_back(q_a(p, x));
    if (p.nu() == 0.5) {
      t.qb_star.push_back(simple_bound(p, x));
      t.z0_star.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      const CornerOptimum o = q_b_optimized(p, x);
      t.qb_star.push_back(o.value);
      t.z0_star.push_back(o.z0);
      t.boundary_hits += o.boundary_hit ? 1 : 0;
      t.multimodal_scans += o.scan_local_optima > 1 ? 1 : 0;
    }
    t.simple.push_back(simple_bound(p, x));
    t.q_ref.push_back(q_gig_reference(p, x));
  }
  return t;
}

}  // namespace gigsim
