#pragma once

// Statistical verification: exact GIG variates, the gamma and reciprocal
// gamma edge cases, two-sample Kolmogorov-Smirnov, QQ and histogram data, and
// the registry of reference parameter settings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "gigsim/errors.hpp"
#include "gigsim/gig.hpp"
#include "gigsim/parallel.hpp"
#include "gigsim/random.hpp"

namespace gigsim {

namespace detail {

// Devroye (2014), "Random variate generation for the generalized inverse
// Gaussian distribution": GIG(nu, omega) with density proportional to
// x^{nu-1} e^{-omega (x + 1/x) / 2}, nu >= 0, via a three-piece envelope of the
// log-concave density of log(x / m).
class DevroyeGig {
 public:
  DevroyeGig(double nu, double omega) : nu_(nu), omega_(omega) {
    alpha_ = std::sqrt(omega * omega + nu * nu) - nu;
    double x = -psi(1.0);
    if (x >= 0.5 && x <= 2.0) {
      t_ = 1.0;
    } else if (x > 2.0) {
      t_ = std::sqrt(2.0 / (alpha_ + nu));
    } else {
      t_ = std::log(4.0 / (alpha_ + 2.0 * nu));
    }
    x = -psi(-1.0);
    if (x >= 0.5 && x <= 2.0) {
      s_ = 1.0;
    } else if (x > 2.0) {
      s_ = std::sqrt(4.0 / (alpha_ * std::cosh(1.0) + nu));
    } else {
      const double inv_a = 1.0 / alpha_;
      const double from_alpha = std::log(1.0 + inv_a + std::sqrt(inv_a * inv_a + 2.0 * inv_a));
      s_ = nu > 0.0 ? std::min(1.0 / nu, from_alpha) : from_alpha;
    }
    eta_ = -psi(t_);
    zeta_ = -dpsi(t_);
    theta_ = -psi(-s_);
    xi_ = dpsi(-s_);
    p_ = 1.0 / xi_;
    r_ = 1.0 / zeta_;
    td_ = t_ - r_ * eta_;
    sd_ = s_ - p_ * theta_;
    q_ = td_ + sd_;
    mode_scale_ = nu / omega + std::sqrt(1.0 + nu * nu / (omega * omega));
  }

  template <Urbg64 G>
  double operator()(G& g) const {
    const double total = p_ + q_ + r_;
    for (;;) {
      const double u = uniform01(g);
      const double v = uniform01(g);
      const double w = uniform01(g);
      double x;
      if (u < q_ / total) {
        x = -sd_ + q_ * v;
      } else if (u < (q_ + r_) / total) {
        x = td_ - r_ * std::log(v);
      } else {
        x = -sd_ + p_ * std::log(v);
      }
      if (w * chi(x) <= std::exp(psi(x))) return mode_scale_ * std::exp(x);
    }
  }

 private:
  double psi(double x) const { return -alpha_ * (std::cosh(x) - 1.0) - nu_ * (std::expm1(x) - x); }
  double dpsi(double x) const { return -alpha_ * std::sinh(x) - nu_ * std::expm1(x); }
  double chi(double x) const {
    if (x >= -sd_ && x <= td_) return 1.0;
    if (x > td_) return std::exp(-eta_ - zeta_ * (x - t_));
    return std::exp(-theta_ + xi_ * (x + s_));
  }

  double nu_, omega_, alpha_;
  double t_ = 1.0, s_ = 1.0;
  double eta_, zeta_, theta_, xi_, p_, r_, td_, sd_, q_;
  double mode_scale_;
};

}  // namespace detail

/// n i.i.d. GIG(lambda, gamma, delta) variates, gamma > 0 and delta > 0.
template <Urbg64 G>
std::vector<double> sample_gig_exact(const GigParams& p, std::size_t n, G& g) {
  if (!(p.gamma > 0.0) || !(p.delta > 0.0) || !std::isfinite(p.lambda)) {
    throw DomainError("sample_gig_exact: requires gamma > 0, delta > 0");
  }
  const double omega = p.gamma * p.delta;
  const double scale = p.delta / p.gamma;
  const detail::DevroyeGig gen(std::abs(p.lambda), omega);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double y = gen(g);
    x = p.lambda >= 0.0 ? scale * y : scale / y;
  }
  return out;
}

/// delta = 0: Gamma(lambda, gamma^2/2);  gamma = 0: 1/Gamma(-lambda, delta^2/2).
template <Urbg64 G>
std::vector<double> sample_edge_exact(const GigParams& p, std::size_t n, G& g) {
  std::vector<double> out(n);
  if (p.delta == 0.0 && p.gamma > 0.0 && p.lambda > 0.0) {
    for (auto& x : out) x = sample_gamma(p.lambda, 0.5 * p.gamma * p.gamma, g);
  } else if (p.gamma == 0.0 && p.delta > 0.0 && p.lambda < 0.0) {
    for (auto& x : out) x = 1.0 / sample_gamma(-p.lambda, 0.5 * p.delta * p.delta, g);
  } else {
    throw DomainError("sample_edge_exact: needs delta = 0 with lambda > 0, or gamma = 0 with lambda < 0");
  }
  return out;
}

/// Exact GIG variates for any valid parameter triple.
template <Urbg64 G>
std::vector<double> sample_oracle(const GigParams& p, std::size_t n, G& g) {
  if (p.gamma == 0.0 || p.delta == 0.0) return sample_edge_exact(p, n, g);
  return sample_gig_exact(p, n, g);
}

struct KsResult {
  double d_stat = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  double threshold = 0.0;
  bool pass = false;
};

/// c(alpha) = sqrt(-log(alpha/2) / 2), the asymptotic KS critical value.
inline double ks_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks_critical_value: alpha must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

/// sup_x |F_a(x) - F_b(x)|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_statistic: samples must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  return d;
}

/// Two-sample KS; pass iff D < c(alpha) sqrt((n + m) / (n m)).
inline KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.01) {
  if (a.size() < 100 || b.size() < 100) throw DomainError("ks_two_sample: both samples need at least 100 values");
  KsResult r;
  r.n = a.size();
  r.m = b.size();
  r.d_stat = ks_statistic(a, b);
  const double n = static_cast<double>(r.n);
  const double m = static_cast<double>(r.m);
  r.threshold = ks_critical_value(alpha) * std::sqrt((n + m) / (n * m));
  r.pass = r.d_stat < r.threshold;
  return r;
}

/// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("empirical_quantile: empty sample");
  const double h = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

struct QqRow {
  double p, q_engine, q_oracle;
};

struct HistogramRow {
  double bin_left, bin_right;
  std::size_t count_engine, count_oracle;
};

/// Quantile pairs at k/(points+1), k = 1..points.
inline std::vector<QqRow> qq_rows(std::vector<double> engine, std::vector<double> oracle, std::size_t points) {
  std::sort(engine.begin(), engine.end());
  std::sort(oracle.begin(), oracle.end());
  std::vector<QqRow> rows;
  rows.reserve(points);
  for (std::size_t k = 1; k <= points; ++k) {
    const double p = static_cast<double>(k) / (points + 1);
    rows.push_back({p, empirical_quantile(engine, p), empirical_quantile(oracle, p)});
  }
  return rows;
}

/// Equal-width bins over the pooled range; every value lands in a bin.
inline std::vector<HistogramRow> histogram_rows(const std::vector<double>& engine, const std::vector<double>& oracle,
                                                std::size_t bins) {
  if (bins == 0) throw DomainError("histogram_rows: bins must be positive");
  if (engine.empty() || oracle.empty()) throw DomainError("histogram_rows: samples must be nonempty");
  const auto [emin, emax] = std::minmax_element(engine.begin(), engine.end());
  const auto [omin, omax] = std::minmax_element(oracle.begin(), oracle.end());
  const double lo = std::min(*emin, *omin);
  double hi = std::max(*emax, *omax);
  if (hi == lo) hi = lo + 1.0;
  const double width = (hi - lo) / bins;
  std::vector<HistogramRow> rows(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    rows[k].bin_left = lo + k * width;
    rows[k].bin_right = k + 1 == bins ? hi : lo + (k + 1) * width;
    rows[k].count_engine = 0;
    rows[k].count_oracle = 0;
  }
  auto index = [&](double x) {
    const auto k = static_cast<std::size_t>((x - lo) / width);
    return std::min(k, bins - 1);
  };
  for (double x : engine) ++rows[index(x)].count_engine;
  for (double x : oracle) ++rows[index(x)].count_oracle;
  return rows;
}

/// Writes <prefix>_qq.csv (p,q_engine,q_oracle) and <prefix>_hist.csv
/// (bin_left,bin_right,count_engine,count_oracle).
inline void emit_qq_histogram(const std::vector<double>& engine, const std::vector<double>& oracle, std::size_t bins,
                              const std::string& prefix, std::size_t qq_points = 1000) {
  std::ofstream qq(prefix + "_qq.csv");
  if (!qq) throw std::runtime_error("cannot open " + prefix + "_qq.csv");
  qq << std::setprecision(17) << "p,q_engine,q_oracle\n";
  for (const auto& r : qq_rows(engine, oracle, qq_points)) qq << r.p << ',' << r.q_engine << ',' << r.q_oracle << '\n';
  std::ofstream hist(prefix + "_hist.csv");
  if (!hist) throw std::runtime_error("cannot open " + prefix + "_hist.csv");
  hist << std::setprecision(17) << "bin_left,bin_right,count_engine,count_oracle\n";
  for (const auto& r : histogram_rows(engine, oracle, bins)) {
    hist << r.bin_left << ',' << r.bin_right << ',' << r.count_engine << ',' << r.count_oracle << '\n';
  }
  if (!qq || !hist) throw std::runtime_error("write failed for " + prefix);
}

/// A reference parameter setting and a short label.
struct ReferenceSetting {
  const char* name;
  GigParams params;
};

inline const std::vector<ReferenceSetting>& reference_settings() {
  static const std::vector<ReferenceSetting> settings = {
      {"lam-0.1_g0.1_d2", {-0.1, 0.1, 2.0}}, {"lam-0.4_g0.5_d1", {-0.4, 0.5, 1.0}},
      {"lam-1_g0.5_d4", {-1.0, 0.5, 4.0}},   {"lam-0.3_g0_d4", {-0.3, 0.0, 4.0}},
      {"lam-1_g0_d4", {-1.0, 0.0, 4.0}},     {"lam1_g0.4_d4", {1.0, 0.4, 4.0}},
      {"lam0.3_g0.5_d2", {0.3, 0.5, 2.0}},
  };
  return settings;
}

inline constexpr std::uint64_t kOracleDomain = 0x6f7261636c65ULL;

/// W(T) of n independent engine paths; path i uses stream
/// derive_stream_key(seed, i), so the output does not depend on `threads`.
inline std::vector<double> engine_terminal_values(const GigParams& p, std::size_t n, std::uint64_t seed,
                                                  const GigOptions& opt, unsigned threads, double horizon = 1.0,
                                                  RunStats* stats = nullptr) {
  std::vector<double> out(n);
  std::vector<RunStats> per_worker(std::max(1u, threads));
  parallel_for(n, threads, [&](unsigned w, std::size_t i) {
    const JumpSeries s = sample_gig(p, horizon, opt, derive_stream_key(seed, i), stats ? &per_worker[w] : nullptr);
    out[i] = s.total();
  });
  if (stats) {
    for (const auto& r : per_worker) stats->merge(r);
  }
  return out;
}

/// n oracle variates from a stream separate from every engine path.
inline std::vector<double> oracle_values(const GigParams& p, std::size_t n, std::uint64_t seed) {
  RandomStream g(derive_stream_key(seed ^ kOracleDomain, 0));
  return sample_oracle(p, n, g);
}

/// `ks.threshold` is the acceptance tolerance on D; `alpha_threshold` is the
/// KS critical value at the requested significance, reported alongside.
struct VerifyOutcome {
  KsResult ks;
  double alpha_threshold = 0.0;
  RunStats stats;
};

/// Engine W(1) against the exact law. `oracle_params` defaults to `p`; passing
/// a different triple gives a negative control.
inline VerifyOutcome verify_setting(const GigParams& p, std::size_t n, std::uint64_t seed, const GigOptions& opt,
                                    unsigned threads, double max_d, const GigParams* oracle_params = nullptr,
                                    double alpha = 0.01) {
  VerifyOutcome out;
  const std::vector<double> engine = engine_terminal_values(p, n, seed, opt, threads, 1.0, &out.stats);
  const std::vector<double> oracle = oracle_values(oracle_params ? *oracle_params : p, n, seed);
  out.ks = ks_two_sample(engine, oracle, alpha);
  out.alpha_threshold = out.ks.threshold;
  out.ks.threshold = max_d;
  out.ks.pass = out.ks.d_stat < max_d;
  return out;
}

}  // namespace gigsim
