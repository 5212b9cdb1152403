#pragma once

// Closed-form laws and bounds for secrecy-graph percolation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "secperc/errors.hpp"
#include "secperc/geometry.hpp"
#include "secperc/model.hpp"
#include "secperc/special.hpp"

namespace secperc::analytic {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// Nearest-eavesdropper distance rho.

/// Law of the distance from a fixed point to the nearest point of a PPP of
/// intensity lambda_e: P(rho > s) = exp(-pi lambda_e s^2).
class RhoLaw {
 public:
  explicit RhoLaw(double lambda_e) : lambda_e_(lambda_e) {
    if (!(lambda_e > 0.0) || !std::isfinite(lambda_e))
      throw ParameterError("rho law: eavesdropper intensity must be positive");
  }

  double lambda_e() const noexcept { return lambda_e_; }
  double pdf(double s) const {
    return s < 0.0 ? 0.0 : 2.0 * pi * lambda_e_ * s * std::exp(-pi * lambda_e_ * s * s);
  }
  double survival(double s) const { return s <= 0.0 ? 1.0 : std::exp(-pi * lambda_e_ * s * s); }
  double cdf(double s) const { return 1.0 - survival(s); }
  /// E{rho^2} = 1 / (pi lambda_e).
  double mean_sq() const { return 1.0 / (pi * lambda_e_); }
  /// E{rho^2 ; rho > r} = exp(-pi lambda_e r^2) (r^2 + 1 / (pi lambda_e)).
  double tail_sq(double r) const {
    if (r <= 0.0) return mean_sq();
    return std::exp(-pi * lambda_e_ * r * r) * (r * r + mean_sq());
  }

 private:
  double lambda_e_;
};

inline RhoLaw rho_law(double lambda_e) { return RhoLaw(lambda_e); }

// ---------------------------------------------------------------------------
// Path-loss competition between the nearest eavesdropper and the nearest
// legitimate node outside B(0, N1).

/// P(D_e < D_l(N1)) = 1 - exp(-lambda_e pi N1^2) lambda / (lambda + lambda_e).
inline double prob_De_lt_Dl_closed(double lambda, double lambda_e, double n1) {
  if (lambda < 0.0 || lambda_e < 0.0) throw ParameterError("intensities must be non-negative");
  if (lambda == 0.0 && lambda_e == 0.0)
    throw ParameterError("at least one intensity must be positive");
  if (n1 < 0.0) throw ParameterError("n1 must be non-negative");
  return 1.0 - std::exp(-lambda_e * pi * n1 * n1) * lambda / (lambda + lambda_e);
}

/// CDF of X = D_l(N1) - N1: 1 - exp(-pi lambda (x^2 + 2 x N1)).
inline double excess_distance_cdf(double lambda, double n1, double x) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-pi * lambda * (x * x + 2.0 * x * n1));
}

/// PDF of X: 2 pi lambda (x + N1) exp(-pi lambda (x^2 + 2 x N1)).
inline double excess_distance_pdf(double lambda, double n1, double x) {
  if (x < 0.0) return 0.0;
  return 2.0 * pi * lambda * (x + n1) * std::exp(-pi * lambda * (x * x + 2.0 * x * n1));
}

// ---------------------------------------------------------------------------
// Marked-process areas nu and nu1.

/// pi * integral_{lower}^{inf} x^{2/alpha} e^{-x} dx = pi Gamma(1 + 2/alpha, lower),
/// for any alpha > 0.
inline double pi_power_exp_integral(double alpha, double lower) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (lower < 0.0) throw ParameterError("lower limit must be non-negative");
  return pi * special::upper_gamma(1.0 + 2.0 / alpha, lower);
}

/// Same integral by adaptive quadrature; the independent second route.
inline double pi_power_exp_integral_quadrature(double alpha, double lower) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (lower < 0.0) throw ParameterError("lower limit must be non-negative");
  const double s = 2.0 / alpha;
  auto f = [s](double x) { return x <= 0.0 ? 0.0 : std::pow(x, s) * std::exp(-x); };
  // The integrand peaks at x = s; integrate the bulk on a finite range and
  // map only the exponentially small tail.
  const double split = std::max(lower, 0.0) + 60.0;
  const double head = special::integrate(f, lower, split, 1e-16, 1e-14).value;
  const double tail = special::integrate_to_infinity(f, split, 1e-18, 1e-12).value;
  return pi * (head + tail);
}

struct NuIntegrals {
  double nu = 0.0;
  double nu1 = 0.0;
};

/// nu = pi Gamma(1 + 2/alpha), nu1 = pi Gamma(1 + 2/alpha, n1).
inline NuIntegrals nu_integrals(double alpha, double n1) {
  if (!(alpha > 2.0)) throw ParameterError("nu integrals require alpha > 2");
  if (n1 < 0.0) throw ParameterError("n1 must be non-negative");
  return {pi_power_exp_integral(alpha, 0.0), pi_power_exp_integral(alpha, n1)};
}

inline NuIntegrals nu_integrals_quadrature(double alpha, double n1) {
  if (!(alpha > 2.0)) throw ParameterError("nu integrals require alpha > 2");
  if (n1 < 0.0) throw ParameterError("n1 must be non-negative");
  return {pi_power_exp_integral_quadrature(alpha, 0.0),
          pi_power_exp_integral_quadrature(alpha, n1)};
}

/// CDFs of the largest received powers Gamma (legitimate, outside B(0, N1))
/// and Delta (eavesdroppers) under unit-mean exponential fading, with
/// exponent delta = 2 / alpha.
class MarkedCdfs {
 public:
  explicit MarkedCdfs(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    nu_ = pi_power_exp_integral(alpha, 0.0);
  }

  double alpha() const noexcept { return alpha_; }
  double delta() const noexcept { return 2.0 / alpha_; }
  double nu() const noexcept { return nu_; }

  /// P(Gamma <= g) = exp(-lambda nu1 g^-delta).
  double gamma_cdf(double g, double lambda, double n1) const {
    check(g);
    return std::exp(-lambda * pi_power_exp_integral(alpha_, n1) * std::pow(g, -delta()));
  }

  /// P(Delta <= g) = exp(-lambda_e nu g^-delta).
  double delta_cdf(double g, double lambda_e) const {
    check(g);
    return std::exp(-lambda_e * nu_ * std::pow(g, -delta()));
  }

  /// Inverse of delta_cdf: the q-quantile of Delta.
  double delta_quantile(double q, double lambda_e) const {
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("quantile level must lie in (0, 1)");
    return std::pow(lambda_e * nu_ / -std::log(q), 1.0 / delta());
  }

 private:
  static void check(double g) {
    if (!(g > 0.0)) throw ParameterError("received power must be positive");
  }
  double alpha_;
  double nu_;
};

inline MarkedCdfs marked_cdfs(double alpha) { return MarkedCdfs(alpha); }

/// P(Delta > Gamma) = lambda_e nu / (lambda_e nu + lambda nu1).
inline double prob_Delta_gt_Gamma_closed(double lambda, double lambda_e, double alpha, double n1) {
  if (lambda < 0.0 || lambda_e < 0.0) throw ParameterError("intensities must be non-negative");
  if (lambda == 0.0 && lambda_e == 0.0)
    throw ParameterError("at least one intensity must be positive");
  const NuIntegrals v = nu_integrals(alpha, n1);
  return lambda_e * v.nu / (lambda_e * v.nu + lambda * v.nu1);
}

// ---------------------------------------------------------------------------
// Power truncation.

/// Expected number of points of an intensity-`intensity` PPP beyond distance
/// `radius` whose received power d^-alpha H (H ~ Exp(1)) exceeds g:
/// intensity * 2 pi * integral_radius^inf r exp(-g r^alpha) dr.
inline double power_tail_count(double intensity, double alpha, double g, double radius) {
  if (!(g > 0.0) || !(alpha > 0.0)) throw ParameterError("power_tail_count: g and alpha must be positive");
  const double s = 2.0 / alpha;
  return intensity * 2.0 * pi / alpha * std::pow(g, -s) *
         special::upper_gamma(s, g * std::pow(std::max(radius, 0.0), alpha));
}

/// Smallest radius (to 1e-9 relative) with power_tail_count <= tol.
inline double truncation_radius(double intensity, double alpha, double g, double tol) {
  if (!(tol > 0.0)) throw ParameterError("truncation tolerance must be positive");
  if (intensity <= 0.0 || power_tail_count(intensity, alpha, g, 0.0) <= tol) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (power_tail_count(intensity, alpha, g, hi) > tol) hi *= 2.0;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (power_tail_count(intensity, alpha, g, mid) > tol ? lo : hi) = mid;
  }
  return hi;
}

/// Radius beyond which points are dropped in the Delta-versus-Gamma
/// experiment: the expected number of points (either process) past it whose
/// power exceeds the 1e-3 quantile of Delta stays below `tol`.
inline double required_power_radius(double lambda, double lambda_e, double alpha,
                                    double tol = 1e-4, double quantile = 1e-3) {
  if (!(lambda_e > 0.0)) throw ParameterError("eavesdropper intensity must be positive");
  const double g_min = MarkedCdfs(alpha).delta_quantile(quantile, lambda_e);
  return truncation_radius(lambda + lambda_e, alpha, g_min, tol);
}

/// Eavesdropper pad for fading graphs over `expected_nodes` nodes: with
/// probability about 1 - 2 tol no node's strongest eavesdropper lies beyond
/// it. Bounded fades cap the useful radius at (kappa / g_min)^(1/alpha).
inline double fading_pad(double lambda_e, double alpha, const FadingSpec& fading, double tol,
                         double expected_nodes) {
  if (!(tol > 0.0 && tol < 1.0)) throw ParameterError("pad tolerance must lie in (0, 1)");
  if (!(lambda_e > 0.0)) return 0.0;
  const double nodes = std::max(expected_nodes, 1.0);
  const double g_min = MarkedCdfs(alpha).delta_quantile(std::min(0.5, tol / nodes), lambda_e);
  double pad = truncation_radius(lambda_e * nodes, alpha, g_min, tol);
  if (fading.kind == FadingKind::bounded_exponential)
    pad = std::min(pad, std::pow(fading.kappa / g_min, 1.0 / alpha));
  return pad;
}

// ---------------------------------------------------------------------------
// Covering constants.

struct Constants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c = 0.0;
  std::size_t k_count = 0;
  std::size_t l_count = 0;
};

/// Points spaced `spacing` along the boundary of D_half, corners included.
inline std::vector<geom::Point2> boundary_points(double half, double spacing) {
  const auto per_side = static_cast<long>(std::ceil(2.0 * half / spacing));
  std::vector<geom::Point2> pts;
  auto at = [&](long k) { return std::min(-half + static_cast<double>(k) * spacing, half); };
  for (long k = 0; k < per_side; ++k) {
    pts.push_back({at(k), -half});   // bottom, left to right
    pts.push_back({half, at(k)});    // right, bottom to top
    pts.push_back({-at(k), half});   // top, right to left
    pts.push_back({-half, -at(k)});  // left, top to bottom
  }
  return pts;
}

/// True iff every point of a 10^4-point grid over the band
/// D_outer \ D_inner (scaled by `scale`) lies in some c + D_scale.
inline bool covering_valid(std::span<const geom::Point2> centers, double inner, double outer,
                           double scale = 1.0, int per_axis = 50) {
  const double a = inner * scale, b = outer * scale;
  const double reach = scale * (1.0 + 1e-12);
  auto covered = [&](geom::Point2 p) {
    for (const auto& c : centers)
      if (std::fabs(p.x - scale * c.x) <= reach && std::fabs(p.y - scale * c.y) <= reach)
        return true;
    return false;
  };
  // Four side strips of per_axis x per_axis points: [-b, b] along the side,
  // (a, b] across it.
  for (int i = 0; i < per_axis; ++i) {
    const double along = -b + 2.0 * b * i / (per_axis - 1);
    for (int j = 0; j < per_axis; ++j) {
      const double across = a + (b - a) * (j + 1) / per_axis;
      const geom::Point2 probes[4] = {{along, across}, {along, -across}, {across, along}, {-across, along}};
      for (const auto& p : probes)
        if (!covered(p)) return false;
    }
  }
  return true;
}

struct Covering {
  std::vector<geom::Point2> k_set;  // on the boundary of D_10, covers D_10 \ D_9
  std::vector<geom::Point2> l_set;  // on the boundary of D_80, covers D_81 \ D_80
};

inline Covering covering_sets() { return {boundary_points(10.0, 2.0), boundary_points(80.0, 2.0)}; }

/// C1 = C2 = area(D_10) = 400, C3 = |K| |L| from the explicit coverings.
inline Constants covering_constants() {
  const Covering cov = covering_sets();
  if (!covering_valid(cov.k_set, 9.0, 10.0))
    throw InternalError("covering K does not cover D_10 \\ D_9");
  if (!covering_valid(cov.l_set, 80.0, 81.0))
    throw InternalError("covering L does not cover D_81 \\ D_80");
  Constants c;
  c.c1 = 400.0;
  c.c2 = 400.0;
  c.k_count = cov.k_set.size();
  c.l_count = cov.l_set.size();
  c.c3 = static_cast<double>(c.k_count * c.l_count);
  c.c = std::max({c.c1, c.c2, c.c3});
  return c;
}

// ---------------------------------------------------------------------------
// Critical-intensity bounds.

/// Sub-critical lower bound: pi lambda_e / (4 C^2) for path-loss,
/// lambda_e / (4 C^2) for bounded fading.
inline double subcritical_lower_bound(Model model, double lambda_e, double c) {
  if (!(c > 0.0)) throw ParameterError("constant C must be positive");
  if (lambda_e < 0.0) throw ParameterError("eavesdropper intensity must be non-negative");
  const double base = lambda_e / (4.0 * c * c);
  return model == Model::path_loss ? pi * base : base;
}

/// Super-critical upper bound: lambda_e / (1 - (1 - eps) exp(-lambda_e pi N1^2))
/// for path-loss, lambda_e nu (1 - eps) / (eps nu1) for Rayleigh fading.
inline double supercritical_upper_bound(Model model, double lambda_e, double epsilon, double n1,
                                        double alpha) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  if (lambda_e < 0.0) throw ParameterError("eavesdropper intensity must be non-negative");
  if (model == Model::path_loss) {
    if (!(n1 >= 1.0) || n1 != std::floor(n1))
      throw ParameterError("path-loss bound needs an integer N1 >= 1");
    return lambda_e / (1.0 - (1.0 - epsilon) * std::exp(-lambda_e * pi * n1 * n1));
  }
  const NuIntegrals v = nu_integrals(alpha, n1);
  return lambda_e * v.nu * (1.0 - epsilon) / (epsilon * v.nu1);
}

/// Fading-to-path-loss distance scale eta = (kappa / beta)^(1/alpha).
inline double eta(double kappa, double beta, double alpha) {
  if (!(kappa > 0.0) || !(beta > 0.0) || !(alpha > 0.0))
    throw ParameterError("eta: kappa, beta and alpha must be positive");
  return std::pow(kappa / beta, 1.0 / alpha);
}

struct GridBound {
  double epsilon = 0.0;
  double n1 = 0.0;
  double value = 0.0;
};

struct BoundsReport {
  double lambda_e = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  Constants constants;
  NuIntegrals nu_at_best;
  double theorem1_lower = 0.0;  // path-loss, sub-critical
  double theorem3_lower = 0.0;  // bounded fading, sub-critical
  GridBound theorem2_upper;     // path-loss, minimum over the grid
  GridBound theorem4_upper;     // fading, minimum over the grid
  std::vector<GridBound> theorem2_grid;
  std::vector<GridBound> theorem4_grid;
};

inline std::vector<double> default_epsilon_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}
inline std::vector<double> default_n1_grid() { return {1, 2, 3, 4, 5}; }

inline BoundsReport bounds_report(double lambda_e, double alpha, double kappa,
                                  const Constants& constants,
                                  std::span<const double> eps_grid,
                                  std::span<const double> n1_grid) {
  if (eps_grid.empty() || n1_grid.empty()) throw ParameterError("bound grids must be non-empty");
  BoundsReport r;
  r.lambda_e = lambda_e;
  r.alpha = alpha;
  r.kappa = kappa;
  r.constants = constants;
  r.theorem1_lower = subcritical_lower_bound(Model::path_loss, lambda_e, constants.c);
  r.theorem3_lower = subcritical_lower_bound(Model::fading, lambda_e, constants.c);
  r.theorem2_upper.value = std::numeric_limits<double>::infinity();
  r.theorem4_upper.value = std::numeric_limits<double>::infinity();
  for (double n1 : n1_grid) {
    for (double eps : eps_grid) {
      const GridBound pl{eps, n1, supercritical_upper_bound(Model::path_loss, lambda_e, eps, n1, alpha)};
      const GridBound fd{eps, n1, supercritical_upper_bound(Model::fading, lambda_e, eps, n1, alpha)};
      r.theorem2_grid.push_back(pl);
      r.theorem4_grid.push_back(fd);
      if (pl.value < r.theorem2_upper.value) r.theorem2_upper = pl;
      if (fd.value < r.theorem4_upper.value) r.theorem4_upper = fd;
    }
  }
  r.nu_at_best = nu_integrals(alpha, r.theorem4_upper.n1);
  return r;
}

// ---------------------------------------------------------------------------
// Hypotheses of the sub-critical recursion lemma.

struct CurveSample {
  double x = 0.0;
  double value = 0.0;
};

struct RecursionHypotheses {
  bool f_bounded = true;     // f <= 1/2 on [1, 10]
  bool g_bounded = true;     // g <= 1/4 everywhere sampled
  bool recursion = true;     // f(x) <= f(x/10)^2 + g(x) for x >= 10
  std::size_t pairs_checked = 0;
  double max_f_head = 0.0;
  double max_g = 0.0;
  double worst_recursion_gap = -std::numeric_limits<double>::infinity();  // lhs - rhs

  bool all() const noexcept { return f_bounded && g_bounded && recursion; }
};

/// Checks the three hypotheses on sampled f and g. Every f sample at x >= 10
/// must have partners f(x/10) and g(x) on the grids. `slack` is added to
/// every right-hand side (confidence slack for Monte Carlo inputs).
inline RecursionHypotheses gourre_hypotheses_check(std::span<const CurveSample> f,
                                                   std::span<const CurveSample> g,
                                                   double slack = 0.0) {
  auto near = [](double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); };
  auto find = [&](std::span<const CurveSample> s, double x) -> const CurveSample* {
    for (const auto& c : s)
      if (near(c.x, x)) return &c;
    return nullptr;
  };
  const bool has_head = std::any_of(f.begin(), f.end(), [](const CurveSample& c) { return c.x >= 1.0 && c.x <= 10.0; });
  const bool has_decade = std::any_of(f.begin(), f.end(), [](const CurveSample& c) { return c.x >= 10.0 && c.x <= 100.0; });
  if (!has_head || !has_decade)
    throw ParameterError("f samples must cover [1, 10] and the decade above");

  RecursionHypotheses r;
  for (const auto& c : f) {
    if (c.x >= 1.0 && c.x <= 10.0) {
      r.max_f_head = std::max(r.max_f_head, c.value);
      if (c.value > 0.5 + slack) r.f_bounded = false;
    }
  }
  for (const auto& c : g) {
    r.max_g = std::max(r.max_g, c.value);
    if (c.value > 0.25 + slack) r.g_bounded = false;
  }
  for (const auto& c : f) {
    if (c.x < 10.0 && !near(c.x, 10.0)) continue;
    const CurveSample* prev = find(f, c.x / 10.0);
    const CurveSample* gx = find(g, c.x);
    if (prev == nullptr || gx == nullptr)
      throw ParameterError("misaligned grids: missing f(x/10) or g(x) partner");
    const double gap = c.value - (prev->value * prev->value + gx->value);
    r.worst_recursion_gap = std::max(r.worst_recursion_gap, gap);
    if (gap > slack) r.recursion = false;
    ++r.pairs_checked;
  }
  return r;
}

}  // namespace secperc::analytic
