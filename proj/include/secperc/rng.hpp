#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (key, counter), so a stream can be split
// into independent substreams by hashing a tag into the key. Trials derive
// their stream from (master seed, trial index) and never share state, which
// makes results independent of worker count and scheduling.

#include <cmath>
#include <cstdint>
#include <limits>

namespace secperc::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + kGolden));
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b,
                                     std::uint64_t c) noexcept {
  return hash_combine(hash_combine(a, b), c);
}

/// Maps 64 random bits to [0, 1) with 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator satisfying UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Stream(std::uint64_t seed) noexcept : key_(mix64(seed ^ kGolden)) {}
  constexpr Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_(hash_combine(seed, stream_id)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept { return hash_combine(key_, counter_++); }

  /// Independent child stream; does not advance this stream.
  constexpr Stream split(std::uint64_t tag) const noexcept {
    Stream child(0);
    child.key_ = hash_combine(key_, tag, 0x5bd1e995ULL);
    return child;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  double uniform() noexcept { return to_unit((*this)()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Unit-mean exponential.
  double exponential() noexcept { return -std::log1p(-uniform()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Exact Poisson variate: sequential inversion below mean 30, PTRS
/// transformed rejection (Hormann 1993) above.
inline std::uint64_t poisson(Stream& s, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    const double u = s.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    // cdf may stall below u by rounding in the far tail; 1000 steps is far
    // beyond any mass for mean < 30.
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = s.uniform() - 0.5;
    const double v = s.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + k * loglam - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<std::uint64_t>(k);
  }
}

}  // namespace secperc::rng
