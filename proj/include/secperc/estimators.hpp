#pragma once

// Monte Carlo estimators for the path, radius and power-competition events
// of secrecy graphs, the finite-window spanning proxy for percolation, and
// the critical-ratio search built on it.
//
// Every estimator runs trial t on Stream(seed, t); within a trial the
// legitimate sample, the eavesdropper sample, the thinning marks and the
// fade seed come from fixed substreams, so two estimators called with the
// same seed see coupled point processes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "secperc/analytic.hpp"
#include "secperc/disjoint_set.hpp"
#include "secperc/errors.hpp"
#include "secperc/geometry.hpp"
#include "secperc/model.hpp"
#include "secperc/parallel.hpp"
#include "secperc/rng.hpp"
#include "secperc/secrecy_graph.hpp"
#include "secperc/stats.hpp"

namespace secperc::est {

using geom::kInf;
using geom::Point2;
using geom::PPPSample;
using geom::Window;
using graph::NodeId;
using stats::EventEstimate;

/// Trial budget shared by every estimator.
struct Budget {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  unsigned workers = parallel::default_workers();
  /// Truncation tolerance for eavesdropper pads and power radii.
  double truncation_tol = 1e-4;

  void validate() const {
    if (trials < 1) throw ParameterError("trials must be at least 1");
    if (workers < 1) throw ParameterError("workers must be at least 1");
    if (!(truncation_tol > 0.0 && truncation_tol < 1.0))
      throw ParameterError("truncation tolerance must lie in (0, 1)");
  }
};

// Substream tags inside a trial.
inline constexpr std::uint64_t kLegitTag = 1;
inline constexpr std::uint64_t kEavesTag = 2;
inline constexpr std::uint64_t kFadeTag = 3;
inline constexpr std::uint64_t kMarkTag = 4;

namespace detail {

inline void check_intensity(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(name) + " must be finite and non-negative");
}

inline Window square_at(Point2 c, double half) {
  return Window::rectangle(c.x - half, c.x + half, c.y - half, c.y + half);
}

/// Points of `s` inside `w`, relabelled as a sample on `w`.
inline PPPSample restrict_to(const PPPSample& s, const Window& w) {
  PPPSample out{{}, s.intensity, w, rng::hash_combine(s.seed, s.points.size())};
  for (const Point2& p : s.points)
    if (w.contains(p)) out.points.push_back(p);
  return out;
}

/// Eavesdropper pad for a graph over `expected_nodes` nodes.
inline double eaves_pad(double lambda_e, const ModelParams& model, double tol,
                        double expected_nodes) {
  if (!(lambda_e > 0.0)) return 0.0;
  if (model.is_fading())
    return analytic::fading_pad(lambda_e, model.alpha, model.fading, tol, expected_nodes);
  return geom::pad_width(lambda_e, tol, expected_nodes);
}

/// True iff some node of `legit` inside `region` has no eavesdropper within
/// distance r, i.e. rho > r. `eaves` must cover region padded by r.
inline bool some_radius_exceeds(const PPPSample& legit, const Window& region,
                                const geom::GridIndex& eaves_index, double r) {
  for (const Point2& x : legit.points) {
    if (!region.contains(x)) continue;
    bool covered = false;
    eaves_index.for_each_candidate(x, r, [&](std::uint32_t, Point2 e) {
      if (!covered && geom::distance(x, e) <= r) covered = true;
    });
    if (!covered) return true;
  }
  return false;
}

}  // namespace detail

/// Path event centered at q with scale r: some node of q + D_r reaches a
/// node of (q + D_9r) \ (q + D_8r) through nodes of q + D_10r using edges
/// shorter than r. `legit` and `eaves` may extend beyond q + D_10r; nodes
/// outside it are ignored and eaves must cover it.
inline bool path_event_occurs(const PPPSample& legit, const PPPSample& eaves,
                              const ModelParams& model, std::uint64_t fade_seed, Point2 q,
                              double r) {
  const Window box = detail::square_at(q, 10.0 * r);
  const PPPSample inside = detail::restrict_to(legit, box);
  std::vector<NodeId> sources;
  for (NodeId i = 0; i < inside.size(); ++i)
    if (geom::sup_norm({inside.points[i].x - q.x, inside.points[i].y - q.y}) <= r)
      sources.push_back(i);
  if (sources.empty()) return false;
  graph::BuildOptions opts;
  opts.max_edge_length = r;
  const graph::SecrecyGraph g = graph::build_graph(inside, eaves, model, fade_seed, opts);
  const auto seen = graph::reachable(g.adjacency, sources);
  for (NodeId i = 0; i < inside.size(); ++i) {
    if (!seen[i]) continue;
    const double s = geom::sup_norm({inside.points[i].x - q.x, inside.points[i].y - q.y});
    if (s > 8.0 * r && s <= 9.0 * r) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Path and radius events.

/// P(B(0, r)): legitimate nodes on D_10r. Path-loss eavesdroppers are
/// sampled on D_11r, which holds every eavesdropper closer than r to a node
/// of D_10r, so the event is computed without truncation. Fading
/// eavesdroppers use the power-truncation pad.
inline EventEstimate estimate_event_B(double lambda, double lambda_e, double r,
                                      const ModelParams& model, const Budget& budget) {
  detail::check_intensity(lambda, "lambda");
  detail::check_intensity(lambda_e, "lambda_e");
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("r must be positive");
  model.validate();
  budget.validate();
  const Window legit_window = Window::square(10.0 * r);
  const double expected = lambda * legit_window.area();
  const Window eaves_window =
      model.is_fading()
          ? legit_window.padded(detail::eaves_pad(lambda_e, model, budget.truncation_tol, expected))
          : Window::square(11.0 * r);
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const PPPSample legit = geom::sample_ppp(lambda, legit_window, s.split(kLegitTag));
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        return path_event_occurs(legit, eaves, model, s.split(kFadeTag).key(), {0.0, 0.0}, r);
      });
  return stats::make_estimate(hits, budget.trials, budget.seed,
                              {{"lambda", lambda}, {"lambda_e", lambda_e}, {"r", r},
                               {"alpha", model.alpha}});
}

/// P(A_{D_mr}(r)^c): some node of D_mr has rho > r. Only eavesdroppers within
/// r of a node matter, so they are sampled on D_(m+1)r.
inline EventEstimate estimate_event_A_complement(double lambda, double lambda_e, int m, double r,
                                                 const Budget& budget) {
  detail::check_intensity(lambda, "lambda");
  detail::check_intensity(lambda_e, "lambda_e");
  if (m < 1 || m > 100) throw ParameterError("m must lie in 1..100");
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("r must be positive");
  budget.validate();
  const Window region = Window::square(m * r);
  const Window eaves_window = Window::square((m + 1) * r);
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const PPPSample legit = geom::sample_ppp(lambda, region, s.split(kLegitTag));
        if (legit.empty()) return false;
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        const geom::GridIndex index(eaves, r);
        return detail::some_radius_exceeds(legit, region, index, r);
      });
  return stats::make_estimate(hits, budget.trials, budget.seed,
                              {{"lambda", lambda}, {"lambda_e", lambda_e}, {"m", double(m)}, {"r", r}});
}

enum class FadingEvent { G_complement, Q };

inline const char* to_string(FadingEvent e) { return e == FadingEvent::Q ? "Q" : "Gc"; }

/// Bounded-fading events at scale eta = (kappa / beta)^(1/alpha).
/// G_complement: some node of D_10eta receives at most beta at every
/// eavesdropper. With fades capped at kappa only eavesdroppers closer than
/// eta can exceed beta, so they are sampled on D_11eta exactly.
/// Q: the path event of estimate_event_B with eta as scale and fading edges.
inline EventEstimate estimate_fading_events(FadingEvent kind, double lambda, double lambda_e,
                                            double beta, double kappa, double alpha,
                                            const Budget& budget, double g_cap = 40.0) {
  detail::check_intensity(lambda, "lambda");
  detail::check_intensity(lambda_e, "lambda_e");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
  ModelParams model;
  model.alpha = alpha;
  model.fading = {FadingKind::bounded_exponential, kappa};
  model.g_cap = g_cap;
  model.validate();
  budget.validate();
  const double scale = analytic::eta(kappa, beta, alpha);
  const Window region = Window::square(10.0 * scale);
  stats::ParamEcho echo{{"lambda", lambda}, {"lambda_e", lambda_e}, {"beta", beta},
                        {"kappa", kappa},   {"alpha", alpha},       {"eta", scale}};

  if (kind == FadingEvent::G_complement) {
    const Window eaves_window = Window::square(11.0 * scale);
    const auto hits = parallel::count_successes(
        budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
          const PPPSample legit = geom::sample_ppp(lambda, region, s.split(kLegitTag));
          if (legit.empty()) return false;
          const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
          const std::uint64_t fade_seed = s.split(kFadeTag).key();
          const geom::GridIndex index(eaves, scale);
          for (NodeId i = 0; i < legit.size(); ++i) {
            const Point2 x = legit.points[i];
            bool above = false;
            index.for_each_candidate(x, scale, [&](std::uint32_t e, Point2 pe) {
              if (above) return;
              const double d = geom::distance(x, pe);
              const double g = fade_gain(fade_seed, FadeDomain::eaves_pair, i, e, model.fading);
              if (std::pow(d, -alpha) * g > beta) above = true;
            });
            if (!above) return true;
          }
          return false;
        });
    return stats::make_estimate(hits, budget.trials, budget.seed, std::move(echo));
  }

  const double pad =
      detail::eaves_pad(lambda_e, model, budget.truncation_tol, lambda * region.area());
  const Window eaves_window = region.padded(pad);
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const PPPSample legit = geom::sample_ppp(lambda, region, s.split(kLegitTag));
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        return path_event_occurs(legit, eaves, model, s.split(kFadeTag).key(), {0.0, 0.0}, scale);
      });
  return stats::make_estimate(hits, budget.trials, budget.seed, std::move(echo));
}

// ---------------------------------------------------------------------------
// Spanning proxy and critical ratio.

enum class SpanningMode { directed, either };

inline const char* to_string(SpanningMode m) {
  return m == SpanningMode::directed ? "directed" : "either";
}

/// Left-right crossing of [-L, L]^2: a path from a node with x < -L + margin
/// to a node with x > L - margin, forward-directed or in the symmetrized graph.
inline bool spans(const graph::SecrecyGraph& g, double half_width, double margin,
                  SpanningMode mode) {
  std::vector<NodeId> left;
  bool any_right = false;
  for (NodeId i = 0; i < g.size(); ++i) {
    if (g.nodes[i].x < -half_width + margin) left.push_back(i);
    if (g.nodes[i].x > half_width - margin) any_right = true;
  }
  if (left.empty() || !any_right) return false;
  if (mode == SpanningMode::directed) {
    const auto seen = graph::reachable(g.adjacency, left);
    for (NodeId i = 0; i < g.size(); ++i)
      if (seen[i] && g.nodes[i].x > half_width - margin) return true;
    return false;
  }
  DisjointSet ds(g.size());
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j : g.adjacency[i]) ds.unite(i, j);
  std::vector<char> left_root(g.size(), 0);
  for (NodeId i : left) left_root[ds.find(i)] = 1;
  for (NodeId i = 0; i < g.size(); ++i)
    if (g.nodes[i].x > half_width - margin && left_root[ds.find(i)]) return true;
  return false;
}

inline void check_spanning_geometry(double half_width, double margin) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ParameterError("window half-width L must be positive");
  if (!(margin > 0.0) || !(margin < half_width / 4.0))
    throw ParameterError("margin must lie in (0, L/4)");
}

/// Probability of a left-right crossing on [-L, L]^2.
inline EventEstimate estimate_spanning(double lambda, double lambda_e, double half_width,
                                       double margin, const ModelParams& model,
                                       SpanningMode mode, const Budget& budget) {
  detail::check_intensity(lambda, "lambda");
  detail::check_intensity(lambda_e, "lambda_e");
  check_spanning_geometry(half_width, margin);
  model.validate();
  budget.validate();
  const Window window = Window::square(half_width);
  const Window eaves_window = window.padded(
      detail::eaves_pad(lambda_e, model, budget.truncation_tol, lambda * window.area()));
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const PPPSample legit = geom::sample_ppp(lambda, window, s.split(kLegitTag));
        if (legit.size() < 2) return false;
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        const auto g = graph::build_graph(legit, eaves, model, s.split(kFadeTag).key());
        return spans(g, half_width, margin, mode);
      });
  return stats::make_estimate(hits, budget.trials, budget.seed,
                              {{"lambda", lambda}, {"lambda_e", lambda_e}, {"L", half_width},
                               {"margin", margin}, {"alpha", model.alpha}});
}

/// Spanning probability at lambda = ratio * lambda_e with legitimate samples
/// coupled across ratios: each trial samples at ratio_max and thins, so the
/// node sets are nested in the ratio and (for path-loss) so are the events.
inline EventEstimate coupled_spanning(double ratio, double ratio_max, double lambda_e,
                                      double half_width, double margin, const ModelParams& model,
                                      SpanningMode mode, const Budget& budget) {
  if (!(ratio > 0.0) || ratio > ratio_max) throw ParameterError("ratio must lie in (0, ratio_max]");
  const Window window = Window::square(half_width);
  const Window eaves_window = window.padded(detail::eaves_pad(
      lambda_e, model, budget.truncation_tol, ratio_max * lambda_e * window.area()));
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const PPPSample full =
            geom::sample_ppp(ratio_max * lambda_e, window, s.split(kLegitTag));
        const PPPSample legit = geom::thin(full, ratio / ratio_max, s.split(kMarkTag));
        if (legit.size() < 2) return false;
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        const auto g = graph::build_graph(legit, eaves, model, s.split(kFadeTag).key());
        return spans(g, half_width, margin, mode);
      });
  return stats::make_estimate(hits, budget.trials, budget.seed,
                              {{"ratio", ratio}, {"lambda_e", lambda_e}, {"L", half_width},
                               {"margin", margin}});
}

struct CurvePoint {
  double ratio = 0.0;
  EventEstimate estimate;
};

struct WindowCurve {
  double half_width = 0.0;
  std::vector<CurvePoint> curve;  // ascending ratio
  /// 0.5-crossing of the curve; NaN when the bracket does not straddle 0.5.
  double crossing = std::numeric_limits<double>::quiet_NaN();
  stats::Interval crossing_ci{std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()};
};

struct LambdaCEstimate {
  double lambda_e = 0.0;
  double ratio_hat = 0.0;
  stats::Interval ratio_ci;
  std::vector<double> window_halfwidths;
  std::vector<WindowCurve> curves;  // one per window, in window_halfwidths order
};

struct LambdaCSearch {
  std::vector<double> half_widths;  // the largest one yields ratio_hat
  double margin_fraction = 0.1;     // margin = fraction * L
  double ratio_lo = 1.0;
  double ratio_hi = 10.0;
  double tol = 0.05;                // bisection stops once hi - lo <= tol
  SpanningMode mode = SpanningMode::directed;
  /// Extra curve points at ratio_hat * (1 +/- k * sweep_step), k = 1..sweep_points.
  int sweep_points = 4;
  double sweep_step = 0.05;
};

namespace detail {

// Crossing interval from the curve: between the largest ratio whose interval
// lies wholly below 0.5 and the smallest whose interval lies wholly above.
inline stats::Interval crossing_interval(const std::vector<CurvePoint>& curve, double lo,
                                         double hi) {
  stats::Interval ci{lo, hi};
  for (const auto& c : curve) {
    if (c.estimate.ci_high < 0.5) ci.low = std::max(ci.low, c.ratio);
    if (c.estimate.ci_low > 0.5) ci.high = std::min(ci.high, c.ratio);
  }
  if (ci.low > ci.high) std::swap(ci.low, ci.high);
  return ci;
}

}  // namespace detail

/// Bisection on lambda / lambda_e for the 0.5-crossing of the spanning
/// probability, per window. Throws BracketError if the bracket does not
/// straddle 0.5 at the largest window.
inline LambdaCEstimate estimate_lambda_c(double lambda_e, const ModelParams& model,
                                         const LambdaCSearch& search, const Budget& budget) {
  if (!(lambda_e > 0.0)) throw ParameterError("lambda_e must be positive");
  if (search.half_widths.empty()) throw ParameterError("at least one window size is required");
  if (!(search.ratio_lo > 0.0 && search.ratio_hi > search.ratio_lo))
    throw ParameterError("ratio bracket must satisfy 0 < lo < hi");
  if (!(search.tol > 0.0)) throw ParameterError("bisection tolerance must be positive");
  model.validate();
  budget.validate();

  std::vector<double> widths = search.half_widths;
  std::sort(widths.begin(), widths.end());
  LambdaCEstimate out;
  out.lambda_e = lambda_e;
  out.window_halfwidths = widths;

  // Largest window first: it validates the bracket.
  for (auto it = widths.rbegin(); it != widths.rend(); ++it) {
    const double half_width = *it;
    const double margin = search.margin_fraction * half_width;
    check_spanning_geometry(half_width, margin);
    WindowCurve wc;
    wc.half_width = half_width;
    auto eval = [&](double ratio) {
      CurvePoint cp{ratio, coupled_spanning(ratio, search.ratio_hi, lambda_e, half_width, margin,
                                            model, search.mode, budget)};
      wc.curve.push_back(cp);
      return cp.estimate.p_hat;
    };
    const double p_lo = eval(search.ratio_lo);
    const double p_hi = eval(search.ratio_hi);
    const bool straddles = p_lo < 0.5 && p_hi > 0.5;
    if (!straddles && it == widths.rbegin())
      throw BracketError("ratio bracket does not straddle spanning probability 0.5");
    if (straddles) {
      double lo = search.ratio_lo, hi = search.ratio_hi;
      while (hi - lo > search.tol) {
        const double mid = 0.5 * (lo + hi);
        (eval(mid) >= 0.5 ? hi : lo) = mid;
      }
      wc.crossing = 0.5 * (lo + hi);
      for (int k = 1; k <= search.sweep_points; ++k) {
        for (double sign : {-1.0, 1.0}) {
          const double ratio = wc.crossing * (1.0 + sign * k * search.sweep_step);
          if (ratio > search.ratio_lo && ratio < search.ratio_hi) eval(ratio);
        }
      }
    }
    std::sort(wc.curve.begin(), wc.curve.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.ratio < b.ratio; });
    if (straddles) wc.crossing_ci = detail::crossing_interval(wc.curve, search.ratio_lo, search.ratio_hi);
    out.curves.push_back(std::move(wc));
  }
  std::reverse(out.curves.begin(), out.curves.end());
  out.ratio_hat = out.curves.back().crossing;
  out.ratio_ci = out.curves.back().crossing_ci;
  return out;
}

// ---------------------------------------------------------------------------
// Nearest-distance laws.

/// rho for i.i.d. eavesdropper patterns around the origin, exact (no
/// truncation; see geom::sample_nearest_distance).
inline std::vector<double> sample_rho(double lambda_e, std::uint64_t samples, const Budget& budget) {
  if (!(lambda_e > 0.0)) throw ParameterError("lambda_e must be positive");
  budget.validate();
  const double h0 = geom::pad_width(lambda_e, 0.01, 1.0);
  return parallel::map_trials<double>(samples, budget.workers, budget.seed,
                                      [&](std::uint64_t, rng::Stream& s) {
                                        return geom::sample_nearest_distance(lambda_e, 0.0, h0, s);
                                      });
}

/// Sample mean of rho^2; E{rho^2} = 1 / (pi lambda_e).
inline stats::ScalarEstimate estimate_mean_rho_sq(double lambda_e, std::uint64_t samples,
                                                  const Budget& budget) {
  if (samples < 100) throw ParameterError("need at least 100 samples");
  std::vector<double> rho = sample_rho(lambda_e, samples, budget);
  for (double& r : rho) r *= r;
  return stats::summarize(rho, budget.seed);
}

struct DistancePair {
  double eaves = kInf;  // D_e
  double legit = kInf;  // D_l(N1)
};

inline DistancePair sample_distance_pair(double lambda, double lambda_e, double n1, rng::Stream& s) {
  DistancePair d;
  if (lambda_e > 0.0)
    d.eaves = geom::sample_nearest_distance(lambda_e, 0.0, geom::pad_width(lambda_e, 0.01, 1.0),
                                            s.split(kEavesTag));
  if (lambda > 0.0)
    d.legit = geom::sample_nearest_distance(lambda, n1, n1 + 1.0 / std::sqrt(lambda),
                                            s.split(kLegitTag));
  return d;
}

/// P(D_e < D_l(N1)): nearest eavesdropper to the origin against the nearest
/// legitimate node outside B(0, N1).
inline EventEstimate estimate_prob_De_lt_Dl(double lambda, double lambda_e, double n1,
                                            const Budget& budget) {
  detail::check_intensity(lambda, "lambda");
  detail::check_intensity(lambda_e, "lambda_e");
  if (!(n1 >= 0.0) || !std::isfinite(n1)) throw ParameterError("n1 must be non-negative");
  budget.validate();
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const DistancePair d = sample_distance_pair(lambda, lambda_e, n1, s);
        return d.eaves < d.legit;
      });
  return stats::make_estimate(hits, budget.trials, budget.seed,
                              {{"lambda", lambda}, {"lambda_e", lambda_e}, {"n1", n1}});
}

/// Samples of D_l(N1) - N1.
inline std::vector<double> sample_excess_distance(double lambda, double n1, std::uint64_t samples,
                                                  const Budget& budget) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (!(n1 >= 0.0)) throw ParameterError("n1 must be non-negative");
  return parallel::map_trials<double>(samples, budget.workers, budget.seed,
                                      [&](std::uint64_t, rng::Stream& s) {
                                        return sample_distance_pair(lambda, 0.0, n1, s).legit - n1;
                                      });
}

// ---------------------------------------------------------------------------
// Largest received powers under Rayleigh fading.

/// Which legitimate points enter Gamma. `annulus` is the geometric event:
/// points at distance >= N1. `fade_threshold` keeps points anywhere whose
/// fade is at least N1, the marked process whose intensity is
/// lambda nu1 g^(-2/alpha) exactly.
enum class GammaRegion { annulus, fade_threshold };

inline const char* to_string(GammaRegion r) {
  return r == GammaRegion::annulus ? "annulus" : "fade_threshold";
}

struct PowerPair {
  double delta = 0.0;  // strongest eavesdropper
  double gamma = 0.0;  // strongest legitimate node
};

inline PowerPair sample_power_pair(double lambda, double lambda_e, double alpha, double n1,
                                   double r_max, GammaRegion region, rng::Stream& s) {
  PowerPair out;
  const Window box = Window::square(r_max);
  {
    const PPPSample eaves = geom::sample_ppp(lambda_e, box, s.split(kEavesTag));
    rng::Stream fades = s.split(kFadeTag);
    for (const Point2& p : eaves.points) {
      const double h = fades.exponential();
      const double d = geom::norm(p);
      if (d <= r_max && d > 0.0) out.delta = std::max(out.delta, std::pow(d, -alpha) * h);
    }
  }
  const PPPSample legit = geom::sample_ppp(lambda, box, s.split(kLegitTag));
  rng::Stream fades = s.split(kMarkTag);
  for (const Point2& p : legit.points) {
    const double h = fades.exponential();
    const double d = geom::norm(p);
    if (d > r_max || d == 0.0) continue;
    const bool keep = region == GammaRegion::annulus ? d >= n1 : h >= n1;
    if (keep) out.gamma = std::max(out.gamma, std::pow(d, -alpha) * h);
  }
  return out;
}

inline void check_power_inputs(double lambda, double lambda_e, double alpha, double n1,
                               double r_max, double tol) {
  detail::check_intensity(lambda, "lambda");
  if (!(lambda_e > 0.0)) throw ParameterError("lambda_e must be positive");
  if (!(alpha > 2.0)) throw ParameterError("alpha must exceed 2");
  if (!(n1 >= 0.0)) throw ParameterError("n1 must be non-negative");
  const double needed = analytic::required_power_radius(lambda, lambda_e, alpha, tol);
  if (!(r_max >= needed * (1.0 - 1e-9)))
    throw ParameterError("r_max is below the truncation rule (need >= " + std::to_string(needed) + ")");
}

/// P(Delta > Gamma) with both processes truncated to B(0, r_max).
inline EventEstimate estimate_prob_Delta_gt_Gamma(double lambda, double lambda_e, double alpha,
                                                  double n1, double r_max, const Budget& budget,
                                                  GammaRegion region = GammaRegion::annulus) {
  budget.validate();
  check_power_inputs(lambda, lambda_e, alpha, n1, r_max, budget.truncation_tol);
  const auto hits = parallel::count_successes(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        const PowerPair p = sample_power_pair(lambda, lambda_e, alpha, n1, r_max, region, s);
        return p.delta > p.gamma;
      });
  return stats::make_estimate(hits, budget.trials, budget.seed,
                              {{"lambda", lambda}, {"lambda_e", lambda_e}, {"alpha", alpha},
                               {"n1", n1}, {"r_max", r_max}});
}

inline std::vector<PowerPair> sample_power_pairs(double lambda, double lambda_e, double alpha,
                                                 double n1, double r_max, std::uint64_t samples,
                                                 const Budget& budget,
                                                 GammaRegion region = GammaRegion::annulus) {
  budget.validate();
  check_power_inputs(lambda, lambda_e, alpha, n1, r_max, budget.truncation_tol);
  return parallel::map_trials<PowerPair>(samples, budget.workers, budget.seed,
                                         [&](std::uint64_t, rng::Stream& s) {
                                           return sample_power_pair(lambda, lambda_e, alpha, n1,
                                                                    r_max, region, s);
                                         });
}

// ---------------------------------------------------------------------------
// Recursion inequality P(B(0,10r)) <= C3 P(B(0,r))^2 + P(A_{D_100r}(r)^c).

struct RecursionCheck {
  EventEstimate b_large;      // B(0, 10r)
  EventEstimate b_small;      // B(0, r)
  EventEstimate a_complement; // A_{D_100r}(r)^c
  double c3 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_low = 0.0;   // lower confidence end of the left side
  double rhs_high = 0.0;  // upper confidence end of the right side
  bool satisfied = false;
};

/// Verdict from three estimates: satisfied iff lhs_low <= rhs_high.
inline RecursionCheck evaluate_recursion(EventEstimate b_large, EventEstimate b_small,
                                         EventEstimate a_complement, double c3) {
  RecursionCheck r{std::move(b_large), std::move(b_small), std::move(a_complement), c3};
  r.lhs = r.b_large.p_hat;
  r.rhs = c3 * r.b_small.p_hat * r.b_small.p_hat + r.a_complement.p_hat;
  r.lhs_low = r.b_large.ci_low;
  r.rhs_high = c3 * r.b_small.ci_high * r.b_small.ci_high + r.a_complement.ci_high;
  r.satisfied = r.lhs_low <= r.rhs_high;
  return r;
}

/// Path-loss estimate of all three probabilities from one set of samples per
/// trial: legitimate nodes on D_100r, eavesdroppers on D_110r.
inline RecursionCheck check_recursion_inequality(double lambda, double lambda_e, double r,
                                                 double c3, const Budget& budget) {
  detail::check_intensity(lambda, "lambda");
  detail::check_intensity(lambda_e, "lambda_e");
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  if (!(c3 > 0.0)) throw ParameterError("C3 must be positive");
  budget.validate();
  const ModelParams model;
  const Window legit_window = Window::square(100.0 * r);
  const Window eaves_window = Window::square(110.0 * r);
  const Window small_legit = Window::square(10.0 * r);
  const Window small_eaves = Window::square(11.0 * r);
  const auto flags = parallel::map_trials<std::array<char, 3>>(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        std::array<char, 3> f{0, 0, 0};
        const PPPSample legit = geom::sample_ppp(lambda, legit_window, s.split(kLegitTag));
        if (legit.empty()) return f;
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        f[0] = path_event_occurs(legit, eaves, model, 0, {0.0, 0.0}, 10.0 * r);
        f[1] = path_event_occurs(detail::restrict_to(legit, small_legit),
                                 detail::restrict_to(eaves, small_eaves), model, 0, {0.0, 0.0}, r);
        const geom::GridIndex index(eaves, r);
        f[2] = detail::some_radius_exceeds(legit, legit_window, index, r);
        return f;
      });
  std::array<std::uint64_t, 3> n{0, 0, 0};
  for (const auto& f : flags)
    for (int k = 0; k < 3; ++k) n[k] += static_cast<std::uint64_t>(f[k]);
  const stats::ParamEcho echo{{"lambda", lambda}, {"lambda_e", lambda_e}, {"r", r}};
  return evaluate_recursion(stats::make_estimate(n[0], budget.trials, budget.seed, echo),
                            stats::make_estimate(n[1], budget.trials, budget.seed, echo),
                            stats::make_estimate(n[2], budget.trials, budget.seed, echo), c3);
}

// ---------------------------------------------------------------------------
// Escape event versus B and A^c on shared samples.

struct TransformCheck {
  EventEstimate escape;        // farthest out-component node of x1 lies outside D_10r
  EventEstimate b;             // B(0, r)
  EventEstimate a_complement;  // A_{D_10r}(r)^c
  std::uint64_t pathwise_violations = 0;  // trials with escape but neither B nor A^c
};

/// x1 is the node of D_r closest to the origin. Its out-component is
/// explored in the full path-loss graph on D_(10r + p), p the eavesdropper
/// pad, until some member leaves D_10r.
inline TransformCheck estimate_transform_check(double lambda, double lambda_e, double r,
                                               const Budget& budget) {
  detail::check_intensity(lambda, "lambda");
  if (!(lambda_e > 0.0)) throw ParameterError("lambda_e must be positive");
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  budget.validate();
  const ModelParams model;
  const double inner = 10.0 * r;
  const double pad = std::max(r, geom::pad_width(lambda_e, budget.truncation_tol,
                                                 lambda * 4.0 * inner * inner));
  const Window legit_window = Window::square(inner + pad);
  const Window eaves_window = Window::square(inner + 2.0 * pad);
  const Window box = Window::square(inner);
  const auto flags = parallel::map_trials<std::array<char, 3>>(
      budget.trials, budget.workers, budget.seed, [&](std::uint64_t, rng::Stream& s) {
        std::array<char, 3> f{0, 0, 0};
        const PPPSample legit = geom::sample_ppp(lambda, legit_window, s.split(kLegitTag));
        const PPPSample eaves = geom::sample_ppp(lambda_e, eaves_window, s.split(kEavesTag));
        std::size_t x1 = geom::GridIndex::npos;
        double best = kInf;
        for (std::size_t i = 0; i < legit.size(); ++i) {
          const Point2 p = legit.points[i];
          if (geom::sup_norm(p) <= r && geom::norm(p) < best) {
            best = geom::norm(p);
            x1 = i;
          }
        }
        if (x1 != geom::GridIndex::npos) {
          const auto g = graph::build_graph(legit, eaves, model, 0);
          const NodeId src[] = {static_cast<NodeId>(x1)};
          const auto seen = graph::reachable(g.adjacency, src);
          for (std::size_t i = 0; i < legit.size(); ++i)
            if (seen[i] && !box.contains(legit.points[i])) f[0] = 1;
        }
        f[1] = path_event_occurs(legit, eaves, model, 0, {0.0, 0.0}, r);
        const geom::GridIndex index(eaves, r);
        f[2] = detail::some_radius_exceeds(legit, box, index, r);
        return f;
      });
  std::array<std::uint64_t, 3> n{0, 0, 0};
  TransformCheck out;
  for (const auto& f : flags) {
    for (int k = 0; k < 3; ++k) n[k] += static_cast<std::uint64_t>(f[k]);
    if (f[0] && !f[1] && !f[2]) ++out.pathwise_violations;
  }
  const stats::ParamEcho echo{{"lambda", lambda}, {"lambda_e", lambda_e}, {"r", r}};
  out.escape = stats::make_estimate(n[0], budget.trials, budget.seed, echo);
  out.b = stats::make_estimate(n[1], budget.trials, budget.seed, echo);
  out.a_complement = stats::make_estimate(n[2], budget.trials, budget.seed, echo);
  return out;
}

// ---------------------------------------------------------------------------
// Premises of the sub-critical recursion at lambda = 1 / (4 C^2 E{rho^2}).

struct GourrePremises {
  double lambda = 0.0;
  double scale_m = 0.0;  // M = sqrt(E{rho^2}) / 10
  std::vector<analytic::CurveSample> f;  // C * upper CI of P(B(0, M r))
  std::vector<analytic::CurveSample> g;  // lambda C^2 E{rho^2; rho > M r / 10}
  std::vector<EventEstimate> b_estimates;
};

inline GourrePremises estimate_gourre_premises(double lambda_e, double c,
                                               std::span<const double> r_values,
                                               const Budget& budget) {
  const analytic::RhoLaw law(lambda_e);
  GourrePremises out;
  out.lambda = 1.0 / (4.0 * c * c * law.mean_sq());
  out.scale_m = std::sqrt(law.mean_sq()) / 10.0;
  const ModelParams model;
  for (double r : r_values) {
    EventEstimate b = estimate_event_B(out.lambda, lambda_e, out.scale_m * r, model, budget);
    out.f.push_back({r, c * b.ci_high});
    out.g.push_back({r, out.lambda * c * c * law.tail_sq(out.scale_m * r / 10.0)});
    out.b_estimates.push_back(std::move(b));
  }
  return out;
}

}  // namespace secperc::est
