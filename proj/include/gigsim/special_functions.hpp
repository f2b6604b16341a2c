#pragma once

// Real-order Bessel functions of the first and second kind, the squared
// Hankel modulus |H_nu(z)|^2, incomplete gamma functions and square-root
// gamma variates.
//
// Bessel J/Y: Temme's series (z < 2) or Steed's complex continued fraction
// (2 <= z) for the reduced order |mu| <= 1/2, recurrence to the requested
// order, and the Hankel asymptotic expansion once z > max(25, nu^2).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "gigsim/errors.hpp"
#include "gigsim/random.hpp"

namespace gigsim {

/// Order nu >= 0 of a Bessel function. Callers pass |lambda|.
class BesselOrder {
 public:
  explicit BesselOrder(double nu) : nu_(nu) {
    if (!std::isfinite(nu) || nu < 0.0) {
      throw DomainError("BesselOrder: order must be finite and >= 0, got " + std::to_string(nu));
    }
  }
  double value() const { return nu_; }

 private:
  double nu_;
};

struct BesselJY {
  double j;
  double y;
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kFpMin = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;

// Taylor coefficients of 1/Gamma(x) = sum_{k>=1} c_k x^k.
constexpr std::array<double, 26> kRecipGammaCoeffs = {
    1.0,
    0.5772156649015328606065,
    -0.655878071520253881077,
    -0.042002635034095235529,
    0.1665386113822914895017,
    -0.04219773455554433674821,
    -0.009621971527876973562115,
    0.007218943246663099542395,
    -0.001165167591859065112114,
    -0.0002152416741149509728157,
    0.0001280502823881161861532,
    -0.00002013485478078823865569,
    -0.000001250493482142670657345,
    0.000001133027231981695882374,
    -2.05633841697760710345e-7,
    6.116095104481415817862e-9,
    5.002007644469222930056e-9,
    -1.181274570487020144588e-9,
    1.043426711691100510492e-10,
    7.78226343990507125405e-12,
    -3.696805618642205708188e-12,
    5.100370287454475979015e-13,
    -2.058326053566506783222e-14,
    -5.34812253942301798237e-15,
    1.226778628238260790159e-15,
    -1.181259301697458769514e-16,
};

// Temme's gamma combinations for |mu| <= 1/2:
//   gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu),  gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
// from the even/odd parts of the 1/Gamma series, so mu -> 0 is exact.
struct TemmeGammas {
  double gam1;
  double gam2;
  double gampl;  // 1/Gamma(1+mu)
  double gammi;  // 1/Gamma(1-mu)
};

inline TemmeGammas temme_gammas(double mu) {
  // kRecipGammaCoeffs[i] holds c_{i+1}.
  const double mu2 = mu * mu;
  double even = 0.0;  // c_2 + c_4 mu^2 + c_6 mu^4 + ...
  for (int i = 25; i >= 1; i -= 2) even = even * mu2 + kRecipGammaCoeffs[i];
  double odd = 0.0;  // c_1 + c_3 mu^2 + c_5 mu^4 + ...
  for (int i = 24; i >= 0; i -= 2) odd = odd * mu2 + kRecipGammaCoeffs[i];
  const double gam1 = -even;
  const double gam2 = odd;
  return {gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1};
}

inline double sinc_like(double t) {
  return std::abs(t) < 1e-8 ? 1.0 + t * t / 6.0 : std::sinh(t) / t;
}

inline double sin_ratio(double t) {
  return std::abs(t) < 1e-8 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
}

// J_nu and Y_nu for moderate x (Temme / Steed). Valid for all x > 0, but the
// CF1 iteration count grows like x; large x is routed to the asymptotic form.
inline BesselJY bessel_jy_steed(double nu, double x) {
  constexpr int kMaxIt = 100000;
  constexpr double kXMin = 2.0;
  const int nl = x < kXMin ? static_cast<int>(nu + 0.5)
                           : std::max(0, static_cast<int>(nu - x + 1.5));
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double w = xi2 / kPi;

  // CF1: f_nu = J'_nu / J_nu by modified Lentz.
  int isign = 1;
  double h = nu * xi;
  if (h < kFpMin) h = kFpMin;
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 0;
  for (; i < kMaxIt; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b - 1.0 / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  if (i >= kMaxIt) throw NumericalError("bessel_jy: CF1 did not converge");

  // Downward recurrence from nu to mu on an unnormalised J.
  double rjl = isign * kFpMin;
  double rjpl = h * rjl;
  double rjl1 = rjl;
  double rjp1 = rjpl;
  double fact = nu * xi;
  for (int l = nl - 1; l >= 0; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
    if (std::abs(rjl) > 1e250) {
      rjl *= 1e-250;
      rjpl *= 1e-250;
      rjl1 *= 1e-250;
      rjp1 *= 1e-250;
    }
  }
  if (rjl == 0.0) rjl = kEps;
  const double f = rjpl / rjl;

  double rjmu = 0.0;
  double rymu = 0.0;
  double ry1 = 0.0;
  if (x < kXMin) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * xmu;
    const double fact1 = 1.0 / sin_ratio(pimu);
    const double dl = -std::log(x2);
    double e = xmu * dl;
    const double fact2 = sinc_like(e);
    const TemmeGammas g = temme_gammas(xmu);
    double ff = 2.0 / kPi * fact1 * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * dl);
    e = std::exp(e);
    double p = e / (g.gampl * kPi);
    double q = 1.0 / (e * kPi * g.gammi);
    const double pimu2 = 0.5 * pimu;
    const double fact3 = sin_ratio(pimu2);
    const double r = kPi * pimu2 * fact3 * fact3;
    double cc = 1.0;
    const double dd = -x2 * x2;
    double sum = ff + r * q;
    double sum1 = p;
    int k = 1;
    for (; k <= kMaxIt; ++k) {
      ff = (k * ff + p + q) / (k * k - xmu2);
      cc *= dd / k;
      p /= (k - xmu);
      q /= (k + xmu);
      const double del = cc * (ff + r * q);
      sum += del;
      const double del1 = cc * p - k * del;
      sum1 += del1;
      if (std::abs(del) < (1.0 + std::abs(sum)) * kEps) break;
    }
    if (k > kMaxIt) throw NumericalError("bessel_jy: Temme series did not converge");
    rymu = -sum;
    ry1 = -sum1 * xi2;
    const double rymup = xmu * xi * rymu - ry1;
    rjmu = w / (rymup - f * rymu);
  } else {
    // CF2: p + iq by Steed's algorithm.
    double a = 0.25 - xmu2;
    double p = -0.5 * xi;
    double q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = a * xi / (p * p + q * q);
    double cr = br + q * fct;
    double ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den;
    double di = -bi / den;
    double dlr = cr * dr - ci * di;
    double dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    int k = 1;
    for (; k < kMaxIt; ++k) {
      a += 2 * k;
      bi += 2.0;
      dr = a * dr + br;
      di = a * di + bi;
      if (std::abs(dr) + std::abs(di) < kFpMin) dr = kFpMin;
      fct = a / (cr * cr + ci * ci);
      cr = br + cr * fct;
      ci = bi - ci * fct;
      if (std::abs(cr) + std::abs(ci) < kFpMin) cr = kFpMin;
      den = dr * dr + di * di;
      dr /= den;
      di /= -den;
      dlr = cr * dr - ci * di;
      dli = cr * di + ci * dr;
      temp = p * dlr - q * dli;
      q = p * dli + q * dlr;
      p = temp;
      if (std::abs(dlr - 1.0) + std::abs(dli) <= kEps) break;
    }
    if (k >= kMaxIt) throw NumericalError("bessel_jy: CF2 did not converge");
    const double gam = (p - f) / q;
    rjmu = std::sqrt(w / ((p - f) * gam + q));
    rjmu = std::copysign(rjmu, rjl);
    rymu = rjmu * gam;
    const double rymup = rymu * (p + q / gam);
    ry1 = xmu * xi * rymu - rymup;
  }
  const double scale = rjmu / rjl;
  const double j = rjl1 * scale;
  for (int k = 1; k <= nl; ++k) {
    const double rytemp = (xmu + k) * xi2 * ry1 - rymu;
    rymu = ry1;
    ry1 = rytemp;
  }
  return {j, rymu};
}

// Hankel's expansion J + iY = sqrt(2/(pi z)) (P + iQ) e^{i chi}.
struct HankelPQ {
  double p;
  double q;
};

inline HankelPQ hankel_pq(double nu, double z) {
  const double mu4 = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu4 - odd * odd) / (8.0 * k * z);
    const double mag = std::abs(term);
    if (mag == 0.0) return {p, q};
    if (mag > prev) {
      throw NumericalError("hankel_pq: asymptotic series diverged before converging");
    }
    // (-1)^floor(k/2) sign pattern: k=1 +Q, k=2 -P, k=3 -Q, k=4 +P, ...
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1) {
      q += sign * term;
    } else {
      p += sign * term;
    }
    if (mag < 0.25 * kEps * std::abs(p) && k > 2) return {p, q};
    prev = mag;
  }
  throw NumericalError("hankel_pq: asymptotic series did not converge");
}

inline bool use_asymptotic(double nu, double z) {
  return z > std::max(25.0, nu * nu);
}

inline void check_bessel_args(double z, const char* who) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw DomainError(std::string(who) + ": argument must be positive and finite");
  }
}

}  // namespace detail

/// J_nu(z) and Y_nu(z) together (they share all intermediate work).
inline BesselJY bessel_jy(BesselOrder order, double z) {
  detail::check_bessel_args(z, "bessel_jy");
  const double nu = order.value();
  if (detail::use_asymptotic(nu, z)) {
    const auto [p, q] = detail::hankel_pq(nu, z);
    const double phi = (0.5 * nu + 0.25) * detail::kPi;
    const double cz = std::cos(z);
    const double sz = std::sin(z);
    const double cphi = std::cos(phi);
    const double sphi = std::sin(phi);
    const double cchi = cz * cphi + sz * sphi;
    const double schi = sz * cphi - cz * sphi;
    const double amp = std::sqrt(2.0 / (detail::kPi * z));
    return {amp * (p * cchi - q * schi), amp * (p * schi + q * cchi)};
  }
  return detail::bessel_jy_steed(nu, z);
}

inline double bessel_j(BesselOrder order, double z) { return bessel_jy(order, z).j; }

inline double bessel_y(BesselOrder order, double z) { return bessel_jy(order, z).y; }

/// |H_nu(z)|^2 = J_nu(z)^2 + Y_nu(z)^2.
inline double hankel_sq(BesselOrder order, double z) {
  detail::check_bessel_args(z, "hankel_sq");
  const double nu = order.value();
  if (detail::use_asymptotic(nu, z)) {
    // Phase-free: the modulus only needs P^2 + Q^2.
    const auto [p, q] = detail::hankel_pq(nu, z);
    return 2.0 / (detail::kPi * z) * (p * p + q * q);
  }
  const auto [j, y] = detail::bessel_jy_steed(nu, z);
  return j * j + y * y;
}

// ---------------------------------------------------------------------------
// Incomplete gamma functions

/// log Gamma(a) for a > 0; thread-safe (std::lgamma writes the global signgam).
inline double log_gamma(double a) {
  if (a < 170.0) return std::log(std::tgamma(a));
  // Stirling with three correction terms, ample for a >= 170.
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  return (a - 0.5) * std::log(a) - a + 0.5 * std::log(2.0 * detail::kPi) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

struct LogIncompleteGamma {
  double log_p;  // log of gamma(a,x) / Gamma(a)
  double log_q;  // log of Gamma(a,x) / Gamma(a)
};

namespace detail {

inline void check_gamma_args(double a, double x, const char* who) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError(std::string(who) + ": shape a must be positive and finite");
  }
  if (!(x >= 0.0)) {
    throw DomainError(std::string(who) + ": x must be >= 0");
  }
}

// sum_{n>=0} x^n / (a (a+1) ... (a+n)), so gamma(a,x) = x^a e^{-x} * sum.
inline double lower_gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) return sum;
  }
  throw NumericalError("incomplete gamma: series did not converge");
}

// Lentz evaluation of the continued fraction with Gamma(a,x) = x^a e^{-x} * cf.
inline double upper_gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete gamma: continued fraction did not converge");
}

}  // namespace detail

/// log P(a,x) and log Q(a,x), each accurate even where the other side is ~1.
inline LogIncompleteGamma log_incomplete_gamma(double a, double x) {
  detail::check_gamma_args(a, x, "log_incomplete_gamma");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (x == 0.0) return {kNegInf, 0.0};
  if (std::isinf(x)) return {0.0, kNegInf};
  if (a == 0.5 && x < 600.0) {
    const double r = std::sqrt(x);
    const double p = std::erf(r);
    const double q = std::erfc(r);
    if (x < 0.25) return {std::log(p), std::log1p(-p)};
    return {std::log1p(-q), std::log(q)};
  }
  const double lg = log_gamma(a);
  if (x < a + 1.0) {
    const double log_p = a * std::log(x) - x - lg + std::log(detail::lower_gamma_series(a, x));
    return {log_p, std::log1p(-std::exp(log_p))};
  }
  const double log_q = a * std::log(x) - x - lg + std::log(detail::upper_gamma_cf(a, x));
  return {std::log1p(-std::exp(log_q)), log_q};
}

/// P(a,x) = gamma(a,x) / Gamma(a).
inline double regularized_lower_gamma(double a, double x) {
  return std::exp(log_incomplete_gamma(a, x).log_p);
}

/// Q(a,x) = Gamma(a,x) / Gamma(a).
inline double regularized_upper_gamma(double a, double x) {
  return std::exp(log_incomplete_gamma(a, x).log_q);
}

/// gamma(a,x) = int_0^x t^{a-1} e^{-t} dt.
inline double lower_inc_gamma(double a, double x) {
  detail::check_gamma_args(a, x, "lower_inc_gamma");
  if (x == 0.0) return 0.0;
  return std::exp(log_incomplete_gamma(a, x).log_p + log_gamma(a));
}

/// Gamma(a,x) = int_x^inf t^{a-1} e^{-t} dt.
inline double upper_inc_gamma(double a, double x) {
  detail::check_gamma_args(a, x, "upper_inc_gamma");
  return std::exp(log_incomplete_gamma(a, x).log_q + log_gamma(a));
}

/// gamma(a,x) / x^a, finite and accurate as x -> 0 (limit 1/a).
inline double scaled_lower_gamma(double a, double x) {
  detail::check_gamma_args(a, x, "scaled_lower_gamma");
  if (x == 0.0) return 1.0 / a;
  if (x < a + 1.0) return std::exp(-x) * detail::lower_gamma_series(a, x);
  return std::exp(log_incomplete_gamma(a, x).log_p + log_gamma(a) - a * std::log(x));
}

/// Gamma(a,x) / x^a  (used as Gamma(1/2, s)/sqrt(s) in the Jaeger bounds).
inline double scaled_upper_gamma(double a, double x) {
  detail::check_gamma_args(a, x, "scaled_upper_gamma");
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(log_incomplete_gamma(a, x).log_q + log_gamma(a) - a * std::log(x));
}

namespace detail {

// Solve log P(a, x) = target for x in (0, hi], returning y = log x. Newton in log x, safeguarded
// by a bisection bracket. Since P(a,x) <= x^a / Gamma(a+1), the leading-order
// guess is always a lower bracket.
inline double solve_log_lower_y(double a, double target, double hi) {
  const double lg = log_gamma(a);
  double lo_y = -std::numeric_limits<double>::infinity();
  double hi_y = std::log(hi);
  const double y0 = (target + log_gamma(a + 1.0)) / a;
  double y = hi_y;
  if (y0 < hi_y) {
    lo_y = y0;
    y = y0;
  }
  double step = 1.0;
  for (int it = 0; it < 300; ++it) {
    const double x = std::exp(y);
    // Series branch written in log x so that x may underflow.
    const double lp = x < a + 1.0 ? a * y - x - lg + std::log(lower_gamma_series(a, x))
                                  : log_incomplete_gamma(a, x).log_p;
    const double resid = lp - target;
    if (std::abs(resid) < 1e-14) return y;
    if (resid > 0.0) {
      hi_y = y;
    } else {
      lo_y = y;
    }
    // d log P / d log x = x^a e^{-x} / (Gamma(a) P)
    const double slope = std::exp(a * y - x - lg - lp);
    double next = y - resid / slope;
    if (!(next > lo_y && next < hi_y) || !std::isfinite(next)) {
      if (std::isfinite(lo_y)) {
        next = 0.5 * (lo_y + hi_y);
      } else {
        next = hi_y - step;
        step *= 2.0;
      }
    }
    if (std::abs(next - y) < 4.0 * kEps * std::max(1.0, std::abs(y))) return next;
    y = next;
  }
  throw NumericalError("inverse incomplete gamma (lower) did not converge");
}

// Solve log Q(a, x) = target for x in [lo, inf), given log_q_lo = log Q(a, lo).
// Newton in x; the exponential-tail guess lo + (log_q_lo - target) brackets
// the root from one side (which side depends on a <> 1).
inline double solve_log_upper(double a, double target, double lo, double log_q_lo) {
  const double lg = log_gamma(a);
  double lo_x = lo;
  double hi_x = std::numeric_limits<double>::infinity();
  double x = lo + std::max(0.0, log_q_lo - target);
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  for (int it = 0; it < 300; ++it) {
    const double lq = log_incomplete_gamma(a, x).log_q;
    const double resid = lq - target;
    if (std::abs(resid) < 1e-14) return x;
    if (resid > 0.0) {
      lo_x = x;
    } else {
      hi_x = x;
    }
    // d log Q / dx = -x^{a-1} e^{-x} / (Gamma(a) Q)
    const double slope = -std::exp((a - 1.0) * std::log(x) - x - lg - lq);
    double next = x - resid / slope;
    if (!(next > lo_x && next < hi_x) || !std::isfinite(next)) {
      next = std::isfinite(hi_x) ? 0.5 * (lo_x + hi_x) : 2.0 * x + 1.0;
    }
    if (std::abs(next - x) < 4.0 * kEps * x) return next;
    x = next;
  }
  throw NumericalError("inverse incomplete gamma (upper) did not converge");
}

}  // namespace detail

/// x with P(a, x) = p, for p in (0, 1).
inline double inverse_regularized_lower_gamma(double a, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse_regularized_lower_gamma: p must lie in (0,1)");
  detail::check_gamma_args(a, 0.0, "inverse_regularized_lower_gamma");
  return std::exp(detail::solve_log_lower_y(a, std::log(p), std::numeric_limits<double>::max()));
}

// ---------------------------------------------------------------------------
// Square-root gamma variates: Z = X^{1/2}, X ~ Gamma(shape, rate), with density
// 2 rate^shape / Gamma(shape) z^{2 shape - 1} e^{-rate z^2}.

template <Urbg64 G>
double sample_sqrt_gamma(double shape, double rate, G& g) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw DomainError("sample_sqrt_gamma: shape and rate must be positive");
  }
  if (shape == 0.5) {
    // Gamma(1/2, rate) = N^2 / (2 rate)
    return std::abs(sample_standard_normal(g)) / std::sqrt(2.0 * rate);
  }
  return std::sqrt(sample_gamma(shape, rate, g));
}

enum class TruncationRegion { Below, Above };

/// One draw of sqrt-Gamma(shape, rate) conditioned on z < z0 (Below) or
/// z >= z0 (Above), by inverting the incomplete gamma CDF of X = z^2 in log
/// space. Tail regions with tiny mass stay exact; a region whose mass is below
/// 1e-300 is reported as degenerate.
template <Urbg64 G>
double sample_truncated_sqrt_gamma(double shape, double rate, TruncationRegion region, double z0, G& g) {
  if (!(shape > 0.0) || !(rate > 0.0) || !(z0 > 0.0)) {
    throw DomainError("sample_truncated_sqrt_gamma: shape, rate and z0 must be positive");
  }
  static const double kLogMinMass = std::log(1e-300);
  const double s = rate * z0 * z0;
  const LogIncompleteGamma mass = log_incomplete_gamma(shape, s);
  const double log_u = std::log(uniform01(g));
  if (region == TruncationRegion::Below) {
    if (mass.log_p < kLogMinMass) {
      throw NumericalError("sample_truncated_sqrt_gamma: degenerate region below z0");
    }
    const double y = detail::solve_log_lower_y(shape, log_u + mass.log_p, s);
    const double z = std::exp(0.5 * (y - std::log(rate)));
    return z < z0 ? z : std::nextafter(z0, 0.0);
  }
  if (mass.log_q < kLogMinMass) {
    throw NumericalError("sample_truncated_sqrt_gamma: degenerate region above z0");
  }
  const double target = log_u + mass.log_q;
  double x = 0.0;
  if (shape == 0.5 && target > kLogMinMass) {
    // Q(1/2, x) = erfc(sqrt(x))
    const double r = boost::math::erfc_inv(std::exp(target));
    x = std::max(r * r, s);
  } else {
    x = detail::solve_log_upper(shape, target, s, mass.log_q);
  }
  const double z = std::sqrt(x / rate);
  return z >= z0 ? z : z0;
}

}  // namespace gigsim
