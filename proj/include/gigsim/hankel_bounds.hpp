#pragma once

// Piecewise bounds on z |H_nu(z)|^2.
//
//   A(z) = z (Gamma(nu)/pi)^2 (2/z)^{2 nu}   for z < z1,    2/pi   for z >= z1
//   B(z) = H0 (z0/z)^{2 nu - 1}              for z < z0,    H0     for z >= z0
//
// with H0 = z0 |H_nu(z0)|^2 and z1 the crossing point of the two pieces of A.
// For 0 < nu <= 1/2:  A(z) >= z|H|^2 >= B(z);  for nu >= 1/2 the inequalities
// reverse; all three coincide (= 2/pi) at nu = 1/2.

#include <cmath>
#include <numbers>

#include "gigsim/errors.hpp"
#include "gigsim/special_functions.hpp"

namespace gigsim {

/// Corner (z0, H0) of the B(z) envelope.
struct CornerPoint {
  double z0;
  double h0;  // z0 * |H_nu(z0)|^2
};

inline CornerPoint make_corner_point(BesselOrder order, double z0) {
  if (!(z0 > 0.0) || !std::isfinite(z0)) throw DomainError("make_corner_point: z0 must be positive");
  return {z0, z0 * hankel_sq(order, z0)};
}

/// z1 = (2^{1-2nu} pi / Gamma(nu)^2)^{1/(1-2nu)}, the corner of A(z).
/// The expression is 0/0 at nu = 1/2; near there we use its Taylor expansion
/// ln z1 = ln 2 + psi(1/2) + (pi^2/4) h - (7 zeta(3)/3) h^2, h = nu - 1/2, whose
/// limit z1(1/2) = e^{-gamma_E}/2 is only of cosmetic interest because A is
/// constant at nu = 1/2.
inline double corner_z1(BesselOrder order) {
  const double nu = order.value();
  if (!(nu > 0.0)) throw DomainError("corner_z1: requires nu > 0");
  const double h = nu - 0.5;
  if (std::abs(h) < 1e-4) {
    constexpr double kLn2PlusPsiHalf = 0.69314718055994530942 - 1.9635100260214235;
    constexpr double kZeta3 = 1.2020569031595942854;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return std::exp(kLn2PlusPsiHalf + 0.25 * pi2 * h - (7.0 * kZeta3 / 3.0) * h * h);
  }
  const double one_minus = 1.0 - 2.0 * nu;
  const double log_base = one_minus * std::numbers::ln2 + std::log(std::numbers::pi) - 2.0 * log_gamma(nu);
  return std::exp(log_base / one_minus);
}

/// A(z), the small/large-z asymptote envelope of z |H_nu(z)|^2.
inline double bound_a(BesselOrder order, double z) {
  const double nu = order.value();
  if (!(z > 0.0)) throw DomainError("bound_a: z must be positive");
  if (nu == 0.5) return 2.0 / std::numbers::pi;
  if (z >= corner_z1(order)) return 2.0 / std::numbers::pi;
  return std::exp(std::log(z) + 2.0 * (log_gamma(nu) - std::log(std::numbers::pi)) +
                  2.0 * nu * std::log(2.0 / z));
}

/// B(z) through the given corner.
inline double bound_b(BesselOrder order, const CornerPoint& corner, double z) {
  if (!(z > 0.0)) throw DomainError("bound_b: z must be positive");
  if (z >= corner.z0) return corner.h0;
  return corner.h0 * std::pow(corner.z0 / z, 2.0 * order.value() - 1.0);
}

}  // namespace gigsim
