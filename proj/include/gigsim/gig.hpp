#pragma once

// GIG Levy process by auxiliary-variable thinning.
//
// The GIG Levy density is the x-marginal of
//
//   Q(x, z) = 2 e^{-x gamma^2/2} / (pi^2 x) * e^{-z^2 x/(2 delta^2)} / (z |H_nu(z)|^2),
//
// nu = |lambda|, plus lambda e^{-x gamma^2/2} / x when lambda > 0. Replacing
// z|H_nu(z)|^2 by one of its bounds gives a bivariate envelope whose
// x-marginal is a tempered stable or gamma type process and whose z-conditional
// is a (truncated) square-root gamma law. Each envelope point is then kept with
// the ratio of the true to the bounding factor.
//
//   nu >= 1/2  : z|H|^2 >= 2/pi, one tempered 1/2-stable envelope (THEOREM1).
//   nu <  1/2  : z|H|^2 >= B(z) through a corner (z0, H0); the region z < z0
//                gives N1, the region z >= z0 gives N2.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "gigsim/errors.hpp"
#include "gigsim/hankel_bounds.hpp"
#include "gigsim/random.hpp"
#include "gigsim/series.hpp"
#include "gigsim/special_functions.hpp"

namespace gigsim {

/// GIG(lambda, gamma, delta), density proportional to
/// x^{lambda-1} exp(-(delta^2/x + gamma^2 x)/2).
struct GigParams {
  double lambda = -0.5;
  double gamma = 1.0;
  double delta = 1.0;

  double nu() const { return std::abs(lambda); }
  BesselOrder order() const { return BesselOrder(nu()); }
  bool operator==(const GigParams&) const = default;
};

inline void validate(const GigParams& p) {
  if (!std::isfinite(p.lambda) || !std::isfinite(p.gamma) || !std::isfinite(p.delta)) {
    throw DomainError("GigParams: parameters must be finite");
  }
  if (p.gamma < 0.0 || p.delta < 0.0) throw DomainError("GigParams: gamma and delta must be >= 0");
  if (p.gamma == 0.0 && p.delta == 0.0) throw DomainError("GigParams: gamma and delta cannot both be zero");
  if (p.gamma == 0.0 && p.lambda >= 0.0) {
    throw DomainError("GigParams: gamma = 0 requires lambda < 0 (reciprocal gamma case)");
  }
  if (p.delta == 0.0 && p.lambda <= 0.0) {
    throw DomainError("GigParams: delta = 0 requires lambda > 0 (gamma case)");
  }
  if (p.lambda == 0.0) {
    throw RegimeError("GigParams: lambda = 0 is not covered by the envelope construction");
  }
}

enum class Regime { High, Low, GammaOnly };

inline Regime regime_of(const GigParams& p) {
  if (p.delta == 0.0) return Regime::GammaOnly;
  return p.nu() >= 0.5 ? Regime::High : Regime::Low;
}

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::High: return "high";
    case Regime::Low: return "low";
    case Regime::GammaOnly: return "gamma";
  }
  return "?";
}

enum class Source { Theorem1 = 0, N1 = 1, N2 = 2, GammaTerm = 3 };
inline constexpr std::size_t kSourceCount = 4;

inline const char* source_name(Source s) {
  switch (s) {
    case Source::Theorem1: return "THEOREM1";
    case Source::N1: return "N1";
    case Source::N2: return "N2";
    case Source::GammaTerm: return "GAMMA_TERM";
  }
  return "?";
}

/// A candidate (x, z) with the probability of keeping it.
struct EnvelopeSample {
  double x;
  double z;
  double accept_prob;
  Source source;
};

enum class N1Method { Auto, TsEnvelope, TwoGammaEnvelope };

/// Marginal envelope for N2.
///   HalfStable:   C2 x^{-3/2} e^{-x gamma^2/2}, thinned by Q(1/2, s).
///   StableAlpha1: K x^{-2} e^{-theta x}, thinned by sqrt(s) e^s Gamma(1/2, s).
enum class N2Method { HalfStable, StableAlpha1 };

struct SourceStats {
  std::uint64_t proposed = 0;     // envelope points above the jump floor
  std::uint64_t thinned = 0;      // survivors of the x-marginal thinning
  std::uint64_t accepted = 0;     // survivors of the z acceptance step
  std::uint64_t dropped = 0;      // envelope points below the jump floor
  double max_probability = 0.0;   // largest unclamped probability computed
  double truncation_level = 0.0;  // largest envelope jump at the last epoch
  double residual_mean = 0.0;     // bound on the mean of the jumps not generated

  void merge(const SourceStats& o) {
    proposed += o.proposed;
    thinned += o.thinned;
    accepted += o.accepted;
    dropped += o.dropped;
    max_probability = std::max(max_probability, o.max_probability);
    truncation_level = std::max(truncation_level, o.truncation_level);
    residual_mean = std::max(residual_mean, o.residual_mean);
  }
  double accept_rate() const { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed; }
};

struct RunStats {
  std::array<SourceStats, kSourceCount> sources{};

  SourceStats& operator[](Source s) { return sources[static_cast<std::size_t>(s)]; }
  const SourceStats& operator[](Source s) const { return sources[static_cast<std::size_t>(s)]; }
  void merge(const RunStats& o) {
    for (std::size_t i = 0; i < kSourceCount; ++i) sources[i].merge(o.sources[i]);
  }
};

struct GigOptions {
  std::size_t epochs = 1000;
  std::size_t n2_epochs = 0;  // 0: same as epochs
  N1Method n1_method = N1Method::Auto;
  N2Method n2_method = N2Method::HalfStable;
  std::optional<double> z0;  // corner override; default z1

  std::size_t n2_budget() const { return n2_epochs == 0 ? epochs : n2_epochs; }
};

inline constexpr double kProbabilitySlack = 1e-9;

namespace detail {

inline constexpr double kSqrtPi = 1.7724538509055160273;

inline void check_x(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(who) + ": x must be positive and finite");
}

inline void require_delta(const GigParams& p, const char* who) {
  if (!(p.delta > 0.0)) throw DomainError(std::string(who) + ": requires delta > 0");
}

// Clamp to [0, 1] while remembering the raw value for the run statistics.
inline double record_probability(double p, SourceStats* stats) {
  if (stats && p > stats->max_probability) stats->max_probability = p;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// Q(x, z) above, without the lambda > 0 gamma term.
inline double levy_density_bivariate(const GigParams& p, double x, double z) {
  detail::require_delta(p, "levy_density_bivariate");
  detail::check_x(x, "levy_density_bivariate");
  detail::check_x(z, "levy_density_bivariate");
  const double log_v = std::log(2.0) - 0.5 * x * p.gamma * p.gamma - 2.0 * std::log(detail::kPi) - std::log(x) -
                       z * z * x / (2.0 * p.delta * p.delta);
  return std::exp(log_v) / (z * hankel_sq(p.order(), z));
}

// ---------------------------------------------------------------------------
// nu >= 1/2

/// Envelope C x^{-3/2} e^{-x gamma^2/2} with C = delta Gamma(1/2) / (sqrt(2) pi).
inline TemperedStableParams theorem1_envelope(const GigParams& p) {
  return {p.delta * detail::kSqrtPi / (std::numbers::sqrt2 * detail::kPi), 0.5, 0.5 * p.gamma * p.gamma};
}

/// 2 / (pi z |H_nu(z)|^2), exactly 1 at nu = 1/2.
inline double theorem1_accept_prob(BesselOrder order, double z) {
  if (order.value() == 0.5) return 1.0;
  return 2.0 / (detail::kPi * z * hankel_sq(order, z));
}

template <Urbg64 G>
EnvelopeSample propose_theorem1(const GigParams& p, double x, G& g) {
  const double z = sample_sqrt_gamma(0.5, x / (2.0 * p.delta * p.delta), g);
  return {x, z, theorem1_accept_prob(p.order(), z), Source::Theorem1};
}

// Shared tail of every envelope: draw z for each surviving x and accept.
template <Urbg64 G, class Propose>
JumpSeries accept_by_auxiliary(const JumpSeries& candidates, Propose&& propose, G& g, SourceStats* stats) {
  JumpSeries out;
  out.horizon = candidates.horizon;
  out.truncation_level = candidates.truncation_level;
  out.dropped = candidates.dropped;
  for (double x : candidates.jumps) {
    const EnvelopeSample e = propose(x, g);
    const double prob = detail::record_probability(e.accept_prob, stats);
    if (uniform01(g) < prob) out.jumps.push_back(x);
  }
  if (stats) stats->accepted += out.size();
  return out;
}

/// Points of the |lambda| >= 1/2 GIG process on [0, T] (untimed).
template <Urbg64 G>
JumpSeries sample_regime_high(const GigParams& p, double horizon, std::size_t epochs, G& g, SourceStats* stats = nullptr) {
  validate(p);
  if (p.nu() < 0.5) throw RegimeError("sample_regime_high: requires |lambda| >= 0.5");
  detail::require_delta(p, "sample_regime_high");
  TemperedStableParams env = theorem1_envelope(p);
  env.c *= horizon;
  const JumpSeries stable = sample_stable_jumps(env, generate_epochs(epochs, g));
  const JumpSeries tempered = temper_jumps(stable, env.beta, g);
  if (stats) {
    stats->proposed += stable.size();
    stats->dropped += stable.dropped;
    stats->thinned += tempered.size();
    stats->truncation_level = std::max(stats->truncation_level, stable.truncation_level);
    stats->residual_mean = std::max(stats->residual_mean, 2.0 * env.c * std::sqrt(stable.truncation_level));
  }
  return accept_by_auxiliary(tempered, [&](double x, G& rng) { return propose_theorem1(p, x, rng); }, g, stats);
}

// ---------------------------------------------------------------------------
// 0 < nu < 1/2

/// Default corner z0 = z1, or the override.
inline CornerPoint resolve_corner(const GigParams& p, const GigOptions& opt) {
  const BesselOrder order = p.order();
  if (opt.z0) return make_corner_point(order, *opt.z0);
  return make_corner_point(order, corner_z1(order));
}

inline N1Method resolve_n1_method(const GigParams& p, N1Method m) {
  if (m == N1Method::Auto) return p.gamma > 0.0 ? N1Method::TwoGammaEnvelope : N1Method::TsEnvelope;
  if (m == N1Method::TwoGammaEnvelope && !(p.gamma > 0.0)) {
    throw RegimeError("two-gamma N1 envelope requires gamma > 0");
  }
  return m;
}

/// Acceptance for both N1 and N2: B(z) / (z |H_nu(z)|^2).
inline double corner_accept_prob(BesselOrder order, const CornerPoint& c, double z) {
  return bound_b(order, c, z) / (z * hankel_sq(order, z));
}

/// N1 tempered nu-stable envelope constant
/// C1 = Gamma(nu) (2 delta^2)^nu / (pi^2 H0 z0^{2 nu - 1}).
inline TemperedStableParams n1_stable_envelope(const GigParams& p, const CornerPoint& c) {
  const double nu = p.nu();
  const double log_c = log_gamma(nu) + nu * std::log(2.0 * p.delta * p.delta) - 2.0 * std::log(detail::kPi) -
                       std::log(c.h0) - (2.0 * nu - 1.0) * std::log(c.z0);
  return {std::exp(log_c), nu, 0.5 * p.gamma * p.gamma};
}

/// gamma(nu, s) / Gamma(nu), s = z0^2 x / (2 delta^2).
inline double n1_stable_thin_prob(const GigParams& p, const CornerPoint& c, double x) {
  const double s = c.z0 * c.z0 * x / (2.0 * p.delta * p.delta);
  return regularized_lower_gamma(p.nu(), s);
}

struct TwoGammaEnvelope {
  GammaProcessParams first;
  GammaProcessParams second;
};

/// Neuman's bound gamma(nu, s) <= s^nu (1 + nu e^{-s}) / (nu (1 + nu)) splits
/// the N1 marginal into two gamma processes.
inline TwoGammaEnvelope n1_two_gamma_envelope(const GigParams& p, const CornerPoint& c) {
  const double nu = p.nu();
  const double base = c.z0 / (detail::kPi * detail::kPi * (1.0 + nu) * c.h0);
  const double b1 = 0.5 * p.gamma * p.gamma;
  return {{base / nu, b1}, {base, b1 + c.z0 * c.z0 / (2.0 * p.delta * p.delta)}};
}

/// nu (1 + nu) gamma(nu, s) / (s^nu (1 + nu e^{-s})).
inline double n1_two_gamma_thin_prob(const GigParams& p, const CornerPoint& c, double x) {
  const double nu = p.nu();
  const double s = c.z0 * c.z0 * x / (2.0 * p.delta * p.delta);
  return nu * (1.0 + nu) * scaled_lower_gamma(nu, s) / (1.0 + nu * std::exp(-s));
}

template <Urbg64 G>
EnvelopeSample propose_n1(const GigParams& p, const CornerPoint& c, double x, G& g) {
  const double z = sample_truncated_sqrt_gamma(p.nu(), x / (2.0 * p.delta * p.delta), TruncationRegion::Below, c.z0, g);
  return {x, z, corner_accept_prob(p.order(), c, z), Source::N1};
}

template <Urbg64 G>
JumpSeries sample_N1(const GigParams& p, const CornerPoint& c, N1Method method, double horizon, std::size_t epochs,
                     G& g, SourceStats* stats = nullptr) {
  validate(p);
  if (!(p.nu() < 0.5)) throw RegimeError("sample_N1: requires |lambda| < 0.5");
  detail::require_delta(p, "sample_N1");
  method = resolve_n1_method(p, method);

  JumpSeries envelope;
  JumpSeries marginal;
  double residual = 0.0;
  auto keep = [&](auto&& thin_prob) {
    return [&, thin_prob](double x) { return detail::record_probability(thin_prob(x), stats); };
  };
  if (method == N1Method::TsEnvelope) {
    TemperedStableParams env = n1_stable_envelope(p, c);
    env.c *= horizon;
    envelope = sample_stable_jumps(env, generate_epochs(epochs, g));
    const JumpSeries tempered = temper_jumps(envelope, env.beta, g);
    marginal = thin_jumps(tempered, keep([&](double x) { return n1_stable_thin_prob(p, c, x); }), g);
    const double eps = envelope.truncation_level;
    residual = env.c * std::pow(eps, 1.0 - env.alpha) / (1.0 - env.alpha);
  } else {
    TwoGammaEnvelope env = n1_two_gamma_envelope(p, c);
    env.first.c *= horizon;
    env.second.c *= horizon;
    const JumpSeries a = sample_gamma_process(env.first, generate_epochs(epochs, g), g);
    const JumpSeries b = sample_gamma_process(env.second, generate_epochs(epochs, g), g);
    envelope = merge_series(a, b);
    marginal = thin_jumps(envelope, keep([&](double x) { return n1_two_gamma_thin_prob(p, c, x); }), g);
    residual = (env.first.c + env.second.c) * envelope.truncation_level;
  }
  if (stats) {
    stats->proposed += envelope.size();
    stats->dropped += envelope.dropped;
    stats->thinned += marginal.size();
    stats->truncation_level = std::max(stats->truncation_level, envelope.truncation_level);
    stats->residual_mean = std::max(stats->residual_mean, residual);
  }
  return accept_by_auxiliary(marginal, [&](double x, G& rng) { return propose_n1(p, c, x, rng); }, g, stats);
}

/// N2 marginal C2 x^{-3/2} e^{-x gamma^2/2} Q(1/2, s) with
/// C2 = (2 delta^2)^{1/2} Gamma(1/2) / (pi^2 H0).
inline TemperedStableParams n2_half_stable_envelope(const GigParams& p, const CornerPoint& c) {
  const double c2 = std::sqrt(2.0) * p.delta * detail::kSqrtPi / (detail::kPi * detail::kPi * c.h0);
  return {c2, 0.5, 0.5 * p.gamma * p.gamma};
}

inline double n2_half_stable_thin_prob(const GigParams& p, const CornerPoint& c, double x) {
  const double s = c.z0 * c.z0 * x / (2.0 * p.delta * p.delta);
  return regularized_upper_gamma(0.5, s);
}

/// K x^{-2} e^{-theta x}: K = 2 delta^2 / (pi^2 z0 H0), theta = (gamma^2 + z0^2/delta^2) / 2.
struct Alpha1Envelope {
  double k;
  double theta;
};

inline Alpha1Envelope n2_alpha1_envelope(const GigParams& p, const CornerPoint& c) {
  const double d2 = p.delta * p.delta;
  return {2.0 * d2 / (detail::kPi * detail::kPi * c.z0 * c.h0), 0.5 * (p.gamma * p.gamma + c.z0 * c.z0 / d2)};
}

/// sqrt(s) e^s Gamma(1/2, s), evaluated in logs.
inline double n2_alpha1_thin_prob(const GigParams& p, const CornerPoint& c, double x) {
  const double s = c.z0 * c.z0 * x / (2.0 * p.delta * p.delta);
  const double log_upper = log_incomplete_gamma(0.5, s).log_q + std::log(detail::kSqrtPi);
  return std::exp(0.5 * std::log(s) + s + log_upper);
}

template <Urbg64 G>
EnvelopeSample propose_n2(const GigParams& p, const CornerPoint& c, double x, G& g) {
  const double z = sample_truncated_sqrt_gamma(0.5, x / (2.0 * p.delta * p.delta), TruncationRegion::Above, c.z0, g);
  return {x, z, corner_accept_prob(p.order(), c, z), Source::N2};
}

template <Urbg64 G>
JumpSeries sample_N2(const GigParams& p, const CornerPoint& c, N2Method method, double horizon, std::size_t epochs,
                     G& g, SourceStats* stats = nullptr) {
  validate(p);
  if (!(p.nu() < 0.5)) throw RegimeError("sample_N2: requires |lambda| < 0.5");
  detail::require_delta(p, "sample_N2");

  JumpSeries envelope;
  JumpSeries marginal;
  const double c2 = n2_half_stable_envelope(p, c).c * horizon;
  auto keep = [&](auto&& thin_prob) {
    return [&, thin_prob](double x) { return detail::record_probability(thin_prob(x), stats); };
  };
  if (method == N2Method::HalfStable) {
    TemperedStableParams env = n2_half_stable_envelope(p, c);
    env.c *= horizon;
    envelope = sample_stable_jumps(env, generate_epochs(epochs, g));
    const JumpSeries tempered = temper_jumps(envelope, env.beta, g);
    marginal = thin_jumps(tempered, keep([&](double x) { return n2_half_stable_thin_prob(p, c, x); }), g);
  } else {
    const Alpha1Envelope env = n2_alpha1_envelope(p, c);
    const double k = env.k * horizon;
    envelope = detail::invert_epochs(generate_epochs(epochs, g), [k](double gamma) { return k / gamma; });
    const JumpSeries tempered = temper_jumps(envelope, env.theta, g);
    marginal = thin_jumps(tempered, keep([&](double x) { return n2_alpha1_thin_prob(p, c, x); }), g);
  }
  if (stats) {
    stats->proposed += envelope.size();
    stats->dropped += envelope.dropped;
    stats->thinned += marginal.size();
    stats->truncation_level = std::max(stats->truncation_level, envelope.truncation_level);
    stats->residual_mean = std::max(stats->residual_mean, 2.0 * c2 * std::sqrt(envelope.truncation_level));
  }
  return accept_by_auxiliary(marginal, [&](double x, G& rng) { return propose_n2(p, c, x, rng); }, g, stats);
}

/// rho1 >= H0 z0^{2nu-1} pi^2 / (2^{2nu} Gamma(nu)^2) and rho2 >= pi H0 / 2,
/// lower bounds on the mean z-acceptance of N1 and N2, independent of x.
struct RhoLowBounds {
  double rho1;
  double rho2;
};

inline RhoLowBounds rho_bounds_low(const GigParams& p, const CornerPoint& c) {
  const double nu = p.nu();
  if (!(nu > 0.0 && nu < 0.5)) throw RegimeError("rho_bounds_low: requires 0 < |lambda| < 0.5");
  const double log_rho1 = std::log(c.h0) + (2.0 * nu - 1.0) * std::log(c.z0) + 2.0 * std::log(detail::kPi) -
                          2.0 * nu * std::numbers::ln2 - 2.0 * log_gamma(nu);
  return {std::exp(log_rho1), detail::kPi * c.h0 / 2.0};
}

// ---------------------------------------------------------------------------
// lambda > 0

/// lambda e^{-x gamma^2/2} / x, a Gamma(lambda, gamma^2/2) process.
template <Urbg64 G>
JumpSeries add_positive_lambda_gamma_term(const GigParams& p, double horizon, std::size_t epochs, G& g,
                                          SourceStats* stats = nullptr) {
  if (!(p.lambda > 0.0)) throw RegimeError("gamma term: requires lambda > 0");
  if (!(p.gamma > 0.0)) throw DomainError("gamma term: lambda > 0 requires gamma > 0");
  const GammaProcessParams gp{p.lambda * horizon, 0.5 * p.gamma * p.gamma};
  const Epochs e = generate_epochs(epochs, g);
  const JumpSeries out = sample_gamma_process(gp, e, g);
  if (stats) {
    // The thinning step is the only acceptance step of this source.
    stats->proposed += e.count() - out.dropped;
    stats->dropped += out.dropped;
    stats->thinned += out.size();
    stats->accepted += out.size();
    stats->max_probability = std::max(stats->max_probability, 1.0);
    stats->truncation_level = std::max(stats->truncation_level, out.truncation_level);
    stats->residual_mean = std::max(stats->residual_mean, gp.c * out.truncation_level);
  }
  return out;
}

/// Union of independent N1 and N2 runs (untimed).
template <Urbg64 G1, Urbg64 G2>
JumpSeries sample_regime_low(const GigParams& p, const GigOptions& opt, double horizon, G1& g1, G2& g2,
                             RunStats* stats = nullptr) {
  validate(p);
  if (!(p.nu() > 0.0 && p.nu() < 0.5)) throw RegimeError("sample_regime_low: requires 0 < |lambda| < 0.5");
  const CornerPoint corner = resolve_corner(p, opt);
  const N1Method n1 = resolve_n1_method(p, opt.n1_method);
  JumpSeries a = sample_N1(p, corner, n1, horizon, opt.epochs, g1, stats ? &(*stats)[Source::N1] : nullptr);
  const JumpSeries b =
      sample_N2(p, corner, opt.n2_method, horizon, opt.n2_budget(), g2, stats ? &(*stats)[Source::N2] : nullptr);
  return merge_series(std::move(a), b);
}

// ---------------------------------------------------------------------------
// Dispatch

namespace stream {
inline constexpr std::uint64_t kMain = 0;  // THEOREM1 or N1
inline constexpr std::uint64_t kN2 = 1;
inline constexpr std::uint64_t kGammaTerm = 2;
inline constexpr std::uint64_t kTimes = 3;
inline constexpr std::uint64_t kMixing = 4;
}  // namespace stream

/// One realization of the GIG process on [0, T] with arrival times. Every
/// component process draws from its own stream derived from `key`.
inline JumpSeries sample_gig(const GigParams& p, double horizon, const GigOptions& opt, std::uint64_t key,
                             RunStats* stats = nullptr) {
  validate(p);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("sample_gig: horizon must be positive");
  if (opt.epochs == 0) throw DomainError("sample_gig: epoch budget must be positive");
  auto slot = [&](Source s) { return stats ? &(*stats)[s] : nullptr; };

  JumpSeries out;
  out.horizon = horizon;
  const Regime regime = regime_of(p);
  if (regime == Regime::High) {
    RandomStream g(derive_stream_key(key, stream::kMain));
    out = merge_series(out, sample_regime_high(p, horizon, opt.epochs, g, slot(Source::Theorem1)));
  } else if (regime == Regime::Low) {
    RandomStream g1(derive_stream_key(key, stream::kMain));
    RandomStream g2(derive_stream_key(key, stream::kN2));
    out = merge_series(out, sample_regime_low(p, opt, horizon, g1, g2, stats));
  }
  if (p.lambda > 0.0) {
    RandomStream g(derive_stream_key(key, stream::kGammaTerm));
    out = merge_series(out, add_positive_lambda_gamma_term(p, horizon, opt.epochs, g, slot(Source::GammaTerm)));
  }
  RandomStream gt(derive_stream_key(key, stream::kTimes));
  return assign_times(std::move(out), horizon, gt);
}

}  // namespace gigsim
