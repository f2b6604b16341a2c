#pragma once

// Shot-noise series: unit-rate Poisson epochs, Ferguson-Klass inversion of a
// tail mass, independent thinning, and uniform arrival times.
//
// A Levy density Q on (0, inf) over the horizon [0, T] is simulated as
//
//     W(t) = sum_i h(Gamma_i) 1{V_i <= t},   h = (T Q+)^{-1},  V_i ~ U[0, T],
//
// truncated after a fixed number of epochs. Where h is not available in closed
// form a dominating density Q0 >= Q with tractable h0 is inverted and each
// point is kept with probability Q(x)/Q0(x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "gigsim/errors.hpp"
#include "gigsim/random.hpp"

namespace gigsim {

// Jumps below this are discarded and counted in JumpSeries::dropped.
inline constexpr double kJumpFloor = 1e-300;

struct Epochs {
  std::vector<double> gammas;
  std::size_t count() const { return gammas.size(); }
};

/// Jump magnitudes with (optionally) their arrival times.
///
/// `times` is either empty (not yet assigned) or the same length as `jumps`.
/// `truncation_level` is the envelope jump at the last epoch, i.e. the size
/// below which the series has no points because the epoch budget ran out.
struct JumpSeries {
  std::vector<double> jumps;
  std::vector<double> times;
  double horizon = 1.0;
  double truncation_level = 0.0;
  std::size_t dropped = 0;

  std::size_t size() const { return jumps.size(); }
  bool empty() const { return jumps.empty(); }
  double total() const { return std::accumulate(jumps.begin(), jumps.end(), 0.0); }
};

/// Q(x) = C x^{-1-alpha} e^{-beta x}.
struct TemperedStableParams {
  double c;
  double alpha;
  double beta;
};

/// Q(x) = C x^{-1} e^{-beta x}.
struct GammaProcessParams {
  double c;
  double beta;
};

inline void validate(const TemperedStableParams& p) {
  if (!(p.c > 0.0) || !std::isfinite(p.c)) throw DomainError("tempered stable: C must be positive");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw DomainError("tempered stable: alpha must lie in (0, 1)");
  if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) throw DomainError("tempered stable: beta must be nonnegative");
}

inline void validate(const GammaProcessParams& p) {
  if (!(p.c > 0.0) || !std::isfinite(p.c)) throw DomainError("gamma process: C must be positive");
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) throw DomainError("gamma process: beta must be positive");
}

template <Urbg64 G>
Epochs generate_epochs(std::size_t n, G& g) {
  if (n == 0) throw DomainError("generate_epochs: n must be at least 1");
  Epochs e;
  e.gammas.resize(n);
  double acc = 0.0;
  for (auto& v : e.gammas) {
    acc += sample_exponential(g);
    v = acc;
  }
  return e;
}

namespace detail {

// Applies h to every epoch, dropping values under the floor. Shared by all
// inversion samplers.
template <class H>
JumpSeries invert_epochs(const Epochs& epochs, H&& h) {
  if (epochs.gammas.empty()) throw DomainError("series: epochs must be nonempty");
  JumpSeries out;
  out.jumps.reserve(epochs.count());
  for (double gamma : epochs.gammas) {
    const double x = h(gamma);
    if (x >= kJumpFloor) {
      out.jumps.push_back(x);
    } else {
      ++out.dropped;
    }
  }
  out.truncation_level = h(epochs.gammas.back());
  return out;
}

}  // namespace detail

/// Untempered stable jumps J_i = (alpha Gamma_i / C)^{-1/alpha}.
inline JumpSeries sample_stable_jumps(const TemperedStableParams& params, const Epochs& epochs) {
  validate(params);
  const double inv = -1.0 / params.alpha;
  return detail::invert_epochs(epochs, [&](double gamma) {
    return std::pow(params.alpha * gamma / params.c, inv);
  });
}

/// Keeps each point with an independent probability keep(x); one uniform per
/// point, drawn in series order.
template <Urbg64 G, class Keep>
JumpSeries thin_jumps(const JumpSeries& series, Keep&& keep, G& g) {
  JumpSeries out;
  out.horizon = series.horizon;
  out.truncation_level = series.truncation_level;
  out.dropped = series.dropped;
  const bool timed = !series.times.empty();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double x = series.jumps[i];
    if (uniform01(g) < keep(x)) {
      out.jumps.push_back(x);
      if (timed) out.times.push_back(series.times[i]);
    }
  }
  return out;
}

template <Urbg64 G>
JumpSeries temper_jumps(const JumpSeries& series, double beta, G& g) {
  if (!(beta >= 0.0)) throw DomainError("temper_jumps: beta must be nonnegative");
  if (beta == 0.0) return series;
  return thin_jumps(series, [beta](double x) { return std::exp(-beta * x); }, g);
}

/// Tempered stable series: stable inversion followed by e^{-beta x} thinning.
template <Urbg64 G>
JumpSeries sample_tempered_stable(const TemperedStableParams& params, const Epochs& epochs, G& g) {
  return temper_jumps(sample_stable_jumps(params, epochs), params.beta, g);
}

/// Gamma process through the dominating density C x^{-1} (1 + beta x)^{-1},
/// whose inverse tail mass is h(Gamma) = 1 / (beta (e^{Gamma/C} - 1)), thinned
/// with probability (1 + beta x) e^{-beta x}.
template <Urbg64 G>
JumpSeries sample_gamma_process(const GammaProcessParams& params, const Epochs& epochs, G& g) {
  validate(params);
  const JumpSeries dominating = detail::invert_epochs(epochs, [&](double gamma) {
    return 1.0 / (params.beta * std::expm1(gamma / params.c));
  });
  const double beta = params.beta;
  return thin_jumps(dominating, [beta](double x) { return (1.0 + beta * x) * std::exp(-beta * x); }, g);
}

template <Urbg64 G>
JumpSeries assign_times(JumpSeries series, double horizon, G& g) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("assign_times: horizon must be positive");
  series.horizon = horizon;
  series.times.resize(series.size());
  for (auto& t : series.times) t = horizon * uniform01(g);
  return series;
}

/// Concatenates two independent point processes on the same horizon.
inline JumpSeries merge_series(JumpSeries a, const JumpSeries& b) {
  if (a.times.empty() != b.times.empty() && !a.empty() && !b.empty()) {
    throw DomainError("merge_series: cannot mix timed and untimed series");
  }
  a.jumps.insert(a.jumps.end(), b.jumps.begin(), b.jumps.end());
  a.times.insert(a.times.end(), b.times.begin(), b.times.end());
  a.truncation_level = std::max(a.truncation_level, b.truncation_level);
  a.dropped += b.dropped;
  return a;
}

struct ProcessPath {
  std::vector<double> grid;
  std::vector<double> values;
};

/// W(t) = sum_i J_i 1{V_i <= t} on a nondecreasing grid inside [0, T].
inline ProcessPath evaluate_path(const JumpSeries& series, std::span<const double> grid) {
  if (!series.empty() && series.times.size() != series.size()) {
    throw DomainError("evaluate_path: series has no arrival times");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= series.horizon)) throw DomainError("evaluate_path: grid point outside [0, T]");
    if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("evaluate_path: grid must be sorted");
  }
  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return series.times[a] < series.times[b]; });

  ProcessPath path{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
  double acc = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (k < order.size() && series.times[order[k]] <= grid[i]) {
      acc += series.jumps[order[k]];
      ++k;
    }
    path.values[i] = acc;
  }
  return path;
}

}  // namespace gigsim
