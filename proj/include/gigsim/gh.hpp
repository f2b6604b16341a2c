#pragma once

// Generalised hyperbolic process as a normal mean-variance mixture over the
// jumps of a GIG process: each GIG jump J becomes N(mu_w J, sigma_w^2 J), with
// the same arrival time.

#include <cmath>
#include <cstdint>

#include "gigsim/errors.hpp"
#include "gigsim/gig.hpp"
#include "gigsim/random.hpp"
#include "gigsim/series.hpp"

namespace gigsim {

struct GhParams {
  GigParams gig;
  double mu_w = 0.0;
  double sigma_w = 1.0;
};

inline void validate(const GhParams& p) {
  validate(p.gig);
  if (!std::isfinite(p.mu_w)) throw DomainError("GhParams: mu_w must be finite");
  if (!(p.sigma_w > 0.0) || !std::isfinite(p.sigma_w)) throw DomainError("GhParams: sigma_w must be positive");
}

/// Mixes a given subordinator series. Jumps of the result are signed.
template <Urbg64 G>
JumpSeries mix_gaussian(const JumpSeries& subordinator, double mu_w, double sigma_w, G& g) {
  JumpSeries out = subordinator;
  for (double& j : out.jumps) {
    j = mu_w * j + sigma_w * std::sqrt(j) * sample_standard_normal(g);
  }
  return out;
}

struct GhSample {
  JumpSeries gh;
  JumpSeries subordinator;
};

/// A GH path together with the GIG path it was mixed over.
inline GhSample sample_gh_with_subordinator(const GhParams& p, double horizon, const GigOptions& opt,
                                            std::uint64_t key, RunStats* stats = nullptr) {
  validate(p);
  JumpSeries gig = sample_gig(p.gig, horizon, opt, key, stats);
  RandomStream g(derive_stream_key(key, stream::kMixing));
  JumpSeries gh = mix_gaussian(gig, p.mu_w, p.sigma_w, g);
  return {std::move(gh), std::move(gig)};
}

inline JumpSeries sample_gh(const GhParams& p, double horizon, const GigOptions& opt, std::uint64_t key,
                            RunStats* stats = nullptr) {
  return sample_gh_with_subordinator(p, horizon, opt, key, stats).gh;
}

}  // namespace gigsim
