#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "secperc/errors.hpp"

namespace secperc::stats {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96) {
  if (trials == 0) throw ParameterError("wilson_interval: trials must be at least 1");
  if (successes > trials) throw ParameterError("wilson_interval: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.low = 0.0;
  if (successes == trials) ci.high = 1.0;
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  return ci;
}

using ParamEcho = std::vector<std::pair<std::string, double>>;

/// Monte Carlo estimate of an event probability.
struct EventEstimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t seed = 0;
  ParamEcho params;

  /// Binomial standard error sqrt(p(1-p)/n).
  double standard_error() const {
    return trials == 0 ? 0.0 : std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
  }
};

inline EventEstimate make_estimate(std::uint64_t successes, std::uint64_t trials,
                                   std::uint64_t seed, ParamEcho params = {}) {
  const Interval ci = wilson_interval(successes, trials);
  return {trials,  successes, static_cast<double>(successes) / static_cast<double>(trials),
          ci.low,  ci.high,   seed,
          std::move(params)};
}

/// Sample mean with a normal-theory interval.
struct ScalarEstimate {
  std::uint64_t samples = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;
};

inline ScalarEstimate summarize(const std::vector<double>& xs, std::uint64_t seed, double z = 1.96) {
  if (xs.size() < 2) throw ParameterError("summarize: need at least two samples");
  // Two-pass, fixed order.
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  return {xs.size(), mean, se, mean - z * se, mean + z * se, seed};
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ParameterError("ks_distance: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace secperc::stats
