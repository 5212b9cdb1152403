#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "secperc/errors.hpp"
#include "secperc/rng.hpp"

namespace secperc {

/// Propagation model family; used by the bound calculators.
enum class Model { path_loss, fading };

enum class FadingKind { none, exponential, bounded_exponential };

struct FadingSpec {
  FadingKind kind = FadingKind::none;
  double kappa = 16.0;  // power-gain cap, bounded_exponential only

  friend bool operator==(const FadingSpec&, const FadingSpec&) = default;
};

struct ModelParams {
  double alpha = 4.0;
  double power = 1.0;
  double gamma = 0.0;
  FadingSpec fading{};
  // Fading candidate pairs needing a gain above this are skipped; the miss
  // probability per pair is exp(-g_cap).
  double g_cap = 40.0;

  bool is_fading() const noexcept { return fading.kind != FadingKind::none; }
  Model model() const noexcept { return is_fading() ? Model::fading : Model::path_loss; }

  /// Largest gain a pair can realistically need: g_cap, or kappa when the
  /// fades are bounded below it.
  double effective_gain_cap() const noexcept {
    if (fading.kind == FadingKind::bounded_exponential) return std::fmin(g_cap, fading.kappa);
    return g_cap;
  }

  void validate() const {
    if (!(alpha > 2.0) || !std::isfinite(alpha))
      throw ParameterError("path-loss exponent alpha must exceed 2");
    if (!(power > 0.0) || !std::isfinite(power))
      throw ParameterError("transmit power must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw ParameterError("secrecy-rate threshold gamma must be non-negative");
    if (fading.kind == FadingKind::bounded_exponential &&
        (!(fading.kappa > 0.0) || !std::isfinite(fading.kappa)))
      throw ParameterError("fading cap kappa must be positive");
    if (!(g_cap > 0.0)) throw ParameterError("g_cap must be positive");
  }
};

inline const char* to_string(Model m) { return m == Model::path_loss ? "pathloss" : "fading"; }

inline const char* to_string(FadingKind k) {
  switch (k) {
    case FadingKind::none: return "none";
    case FadingKind::exponential: return "exponential";
    case FadingKind::bounded_exponential: return "bounded";
  }
  return "none";
}

/// Which population a fade belongs to: node-to-node or node-to-eavesdropper.
enum class FadeDomain : std::uint64_t { legit_pair = 0x4c45474954ULL, eaves_pair = 0x4541564553ULL };

/// Power gain |h|^2 for the ordered pair (i, j), a pure function of
/// (seed, domain, i, j). Unit-mean exponential; the bounded variant is the
/// exponential conditioned on [0, kappa], drawn by inverting its CDF.
inline double fade_gain(std::uint64_t seed, FadeDomain domain, std::uint64_t i, std::uint64_t j,
                        const FadingSpec& spec) noexcept {
  if (spec.kind == FadingKind::none) return 1.0;
  const double u = rng::to_unit(
      rng::mix64(rng::hash_combine(rng::hash_combine(seed, static_cast<std::uint64_t>(domain)), i, j)));
  if (spec.kind == FadingKind::exponential) return -std::log1p(-u);
  return -std::log1p(u * std::expm1(-spec.kappa));
}

}  // namespace secperc
