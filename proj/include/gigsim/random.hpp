#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>

#include "gigsim/errors.hpp"

namespace gigsim {

// Any engine producing full-range 64-bit words. All variate generators below
// are written against this so that a fixed seed gives the same stream on every
// platform (the std:: distributions are implementation defined).
template <class G>
concept Urbg64 = std::uniform_random_bit_generator<G> &&
    (G::min() == 0) && (G::max() == std::numeric_limits<std::uint64_t>::max());

namespace detail {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Stream splitting. The key of stream `id` under `parent` is the id-th output
/// of a SplitMix64 counter started at `parent`:
///
///     key(parent, id) = mix64(parent + (id + 1) * 0x9e3779b97f4a7c15)
///
/// It is a pure function of (parent, id), so a path's randomness never depends
/// on which worker ran it or in which order paths were scheduled. Keys nest:
/// derive_stream_key(derive_stream_key(seed, path), component).
constexpr std::uint64_t derive_stream_key(std::uint64_t parent, std::uint64_t id) {
  return detail::mix64(parent + (id + 1) * detail::kGoldenGamma);
}

/// xoshiro256** seeded from a 64-bit stream key through SplitMix64.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key = 0) {
    std::uint64_t x = key;
    for (auto& s : state_) {
      x += detail::kGoldenGamma;
      s = detail::mix64(x);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::array<std::uint64_t, 4> state_{};
};

// Uniform on the open interval (0, 1): 53 random bits, offset by half an ulp.
template <Urbg64 G>
double uniform01(G& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

template <Urbg64 G>
double sample_exponential(G& g) {
  return -std::log(uniform01(g));
}

// Marsaglia polar method; the second variate of each pair is discarded so
// that the generator carries no hidden state.
template <Urbg64 G>
double sample_standard_normal(G& g) {
  for (;;) {
    const double u = 2.0 * uniform01(g) - 1.0;
    const double v = 2.0 * uniform01(g) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

/// Gamma(shape, rate) with density rate^shape x^(shape-1) e^(-rate x) / Gamma(shape).
/// Marsaglia & Tsang squeeze for shape >= 1, boosted by U^(1/shape) below 1.
template <Urbg64 G>
double sample_gamma(double shape, double rate, G& g) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw DomainError("sample_gamma: shape and rate must be positive and finite");
  }
  if (shape < 1.0) {
    const double boost = std::exp(std::log(uniform01(g)) / shape);
    return sample_gamma(shape + 1.0, rate, g) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = sample_standard_normal(g);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(g);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

}  // namespace gigsim
