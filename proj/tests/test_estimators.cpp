#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <numbers>

#include "secperc/analytic.hpp"
#include "secperc/estimators.hpp"
#include "secperc/special.hpp"

using namespace secperc;
using geom::Point2;
using geom::Window;
using std::numbers::pi;

namespace {

est::Budget budget(std::uint64_t trials, std::uint64_t seed, unsigned workers = 1) {
  est::Budget b;
  b.trials = trials;
  b.seed = seed;
  b.workers = workers;
  return b;
}

double joint_se(const stats::EventEstimate& a, const stats::EventEstimate& b) {
  return std::sqrt(a.standard_error() * a.standard_error() + b.standard_error() * b.standard_error());
}

// B(0, r) for path-loss by exhaustive pair scan on the samples the estimator
// draws for trial t.
bool brute_event_B(double lambda, double lambda_e, double r, std::uint64_t seed, std::uint64_t t) {
  const rng::Stream s(seed, t);
  const auto legit = geom::sample_ppp(lambda, Window::square(10 * r), s.split(est::kLegitTag));
  const auto eaves = geom::sample_ppp(lambda_e, Window::square(11 * r), s.split(est::kEavesTag));
  const auto& p = legit.points;
  const std::size_t n = p.size();
  std::vector<double> rho(n, geom::kInf);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : eaves.points) rho[i] = std::min(rho[i], geom::distance(p[i], e));
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (geom::sup_norm(p[i]) <= r) {
      seen[i] = 1;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const double s_i = geom::sup_norm(p[i]);
    if (s_i > 8 * r && s_i <= 9 * r) return true;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = geom::distance(p[i], p[j]);
      if (!seen[j] && j != i && d < r && d <= rho[i]) {
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }
  return false;
}

bool brute_event_Ac(double lambda, double lambda_e, int m, double r, std::uint64_t seed,
                    std::uint64_t t) {
  const rng::Stream s(seed, t);
  const auto legit = geom::sample_ppp(lambda, Window::square(m * r), s.split(est::kLegitTag));
  if (legit.empty()) return false;
  const auto eaves = geom::sample_ppp(lambda_e, Window::square((m + 1) * r), s.split(est::kEavesTag));
  for (const auto& x : legit.points) {
    double rho = geom::kInf;
    for (const auto& e : eaves.points) rho = std::min(rho, geom::distance(x, e));
    if (rho > r) return true;
  }
  return false;
}

// P(Delta > Gamma) when Gamma ranges over legitimate points at distance >= n1:
// integral of P(Gamma < g) against the law of Delta, by quadrature.
double annulus_delta_gt_gamma(double lambda, double lambda_e, double alpha, double n1) {
  const double s = 2.0 / alpha;
  const double nu = pi * std::tgamma(1.0 + s);
  auto gamma_cdf = [&](double g) {
    return std::exp(-lambda * 2.0 * pi / alpha * std::pow(g, -s) *
                    special::upper_gamma(s, g * std::pow(n1, alpha)));
  };
  auto delta_pdf = [&](double g) {
    return std::exp(-lambda_e * nu * std::pow(g, -s)) * lambda_e * nu * s * std::pow(g, -s - 1.0);
  };
  return special::integrate_to_infinity([&](double g) { return g <= 0 ? 0.0 : delta_pdf(g) * gamma_cdf(g); },
                                        0.0, 1e-12, 1e-10)
      .value;
}

}  // namespace

TEST(EventB, ZeroIntensityGivesZero) {
  const auto e = est::estimate_event_B(0.0, 1.0, 1.0, {}, budget(200, 1));
  EXPECT_EQ(e.successes, 0u);
  EXPECT_EQ(e.ci_low, 0.0);
}

TEST(EventB, MatchesBruteForcePerTrial) {
  const double lambda = 3.0, lambda_e = 0.3, r = 1.0;
  const std::uint64_t trials = 120, seed = 17;
  const auto e = est::estimate_event_B(lambda, lambda_e, r, {}, budget(trials, seed));
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) hits += brute_event_B(lambda, lambda_e, r, seed, t);
  EXPECT_EQ(e.successes, hits);
  EXPECT_GT(hits, 0u);
  EXPECT_LT(hits, trials);
}

TEST(EventB, NoEavesdroppersDenseNearOne) {
  // Complete graph limited only by edge length < r; oracle is the brute scan.
  const std::uint64_t trials = 100, seed = 3;
  const auto e = est::estimate_event_B(4.0, 0.0, 1.0, {}, budget(trials, seed));
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) hits += brute_event_B(4.0, 0.0, 1.0, seed, t);
  EXPECT_EQ(e.successes, hits);
  EXPECT_GT(e.p_hat, 0.95);
}

TEST(EventB, NonIncreasingInRAtLowIntensity) {
  stats::EventEstimate prev;
  bool first = true;
  for (double r : {1.0, 2.0, 4.0}) {
    const auto e = est::estimate_event_B(0.05, 1.0, r, {}, budget(1000, 5));
    if (!first) {
      EXPECT_LE(e.p_hat, prev.p_hat + 3.0 * joint_se(e, prev)) << r;
    }
    prev = e;
    first = false;
  }
}

TEST(EventB, MonotoneInIntensities) {
  const auto lo = est::estimate_event_B(0.5, 1.0, 1.0, {}, budget(800, 9));
  const auto hi = est::estimate_event_B(1.5, 1.0, 1.0, {}, budget(800, 9));
  EXPECT_LE(lo.p_hat, hi.p_hat + 3.0 * joint_se(lo, hi));
  const auto few_e = est::estimate_event_B(1.0, 0.5, 1.0, {}, budget(800, 9));
  const auto many_e = est::estimate_event_B(1.0, 2.0, 1.0, {}, budget(800, 9));
  EXPECT_GE(few_e.p_hat + 3.0 * joint_se(few_e, many_e), many_e.p_hat);
}

TEST(EventB, AreaBound) {
  for (double lambda : {0.01, 0.05})
    for (double r : {0.5, 1.0, 2.0}) {
      const auto e = est::estimate_event_B(lambda, 1.0, r, {}, budget(500, 11));
      EXPECT_LE(e.p_hat, 400.0 * lambda * r * r + 3.0 * e.standard_error()) << lambda << " " << r;
    }
}

TEST(EventB, FadingRunsAndIsDeterministic) {
  ModelParams f;
  f.fading.kind = FadingKind::exponential;
  const auto a = est::estimate_event_B(1.0, 1.0, 1.0, f, budget(60, 2, 1));
  const auto b = est::estimate_event_B(1.0, 1.0, 1.0, f, budget(60, 2, 3));
  EXPECT_EQ(a.successes, b.successes);
}

TEST(EventAc, ZeroIntensityAndDenseEavesdroppers) {
  EXPECT_EQ(est::estimate_event_A_complement(0.0, 1.0, 10, 1.0, budget(200, 1)).successes, 0u);
  EXPECT_EQ(est::estimate_event_A_complement(1.0, 100.0, 2, 1.0, budget(200, 1)).successes, 0u);
  EXPECT_THROW(est::estimate_event_A_complement(1.0, 1.0, 0, 1.0, budget(1, 1)), ParameterError);
  EXPECT_THROW(est::estimate_event_A_complement(1.0, 1.0, 101, 1.0, budget(1, 1)), ParameterError);
}

TEST(EventAc, MatchesBruteForceAndUnionBound) {
  const double lambda = 0.3, lambda_e = 1.2, r = 1.0;
  const int m = 3;
  const std::uint64_t trials = 400, seed = 23;
  const auto e = est::estimate_event_A_complement(lambda, lambda_e, m, r, budget(trials, seed));
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) hits += brute_event_Ac(lambda, lambda_e, m, r, seed, t);
  EXPECT_EQ(e.successes, hits);
  const double union_bound = lambda * std::pow(2.0 * m * r, 2) * std::exp(-pi * lambda_e * r * r);
  EXPECT_LE(e.p_hat, union_bound + 3.0 * e.standard_error());
}

TEST(FadingEvents, ZeroIntensity) {
  for (auto kind : {est::FadingEvent::G_complement, est::FadingEvent::Q})
    EXPECT_EQ(est::estimate_fading_events(kind, 0.0, 1.0, 1.0, 16.0, 4.0, budget(50, 1)).successes, 0u);
}

TEST(FadingEvents, SmallBetaMakesGComplementVanish) {
  const auto e = est::estimate_fading_events(est::FadingEvent::G_complement, 0.05, 0.5, 0.01, 16.0,
                                             4.0, budget(60, 4));
  EXPECT_EQ(e.successes, 0u);
}

TEST(FadingEvents, LargeBetaMakesGComplementLikely) {
  // Few eavesdroppers and a high threshold: most nodes sit below it.
  const auto e = est::estimate_fading_events(est::FadingEvent::G_complement, 1.0, 0.05, 16.0, 16.0,
                                             4.0, budget(200, 4));
  EXPECT_GT(e.p_hat, 0.9);
}

TEST(FadingEvents, EtaEchoAndUnitScale) {
  const auto e = est::estimate_fading_events(est::FadingEvent::Q, 1.0, 1.0, 5.0, 5.0, 4.0, budget(50, 1));
  double eta = 0.0;
  for (const auto& [k, v] : e.params)
    if (k == "eta") eta = v;
  EXPECT_DOUBLE_EQ(eta, 1.0);
  EXPECT_THROW(est::estimate_fading_events(est::FadingEvent::Q, 1, 1, 0.0, 5, 4, budget(1, 1)), ParameterError);
  EXPECT_THROW(est::estimate_fading_events(est::FadingEvent::Q, 1, 1, 1, 0.0, 4, budget(1, 1)), ParameterError);
  EXPECT_THROW(est::estimate_fading_events(est::FadingEvent::Q, 1, 1, 1, 5, 2.0, budget(1, 1)), ParameterError);
}

TEST(Spanning, ZeroIntensity) {
  EXPECT_EQ(est::estimate_spanning(0.0, 1.0, 5.0, 0.5, {}, est::SpanningMode::directed, budget(50, 1)).successes, 0u);
}

TEST(Spanning, NoEavesdroppersIsStripOccupancy) {
  const double lambda = 0.2, L = 5.0, margin = 0.5;
  const double p = std::pow(1.0 - std::exp(-lambda * margin * 2.0 * L), 2.0);
  for (auto mode : {est::SpanningMode::directed, est::SpanningMode::either}) {
    const auto e = est::estimate_spanning(lambda, 0.0, L, margin, {}, mode, budget(2000, 6));
    EXPECT_NEAR(e.p_hat, p, 3.0 * std::sqrt(p * (1 - p) / 2000.0));
  }
}

TEST(Spanning, EitherDominatesDirected) {
  // Same samples, symmetrized graph has a superset of paths.
  const auto d = est::estimate_spanning(2.5, 1.0, 6.0, 0.6, {}, est::SpanningMode::directed, budget(150, 8));
  const auto e = est::estimate_spanning(2.5, 1.0, 6.0, 0.6, {}, est::SpanningMode::either, budget(150, 8));
  EXPECT_GE(e.successes, d.successes);
}

TEST(Spanning, RejectsWideMargin) {
  EXPECT_THROW(est::estimate_spanning(1, 1, 4.0, 1.0, {}, est::SpanningMode::directed, budget(1, 1)),
               ParameterError);
}

TEST(Spanning, CoupledCurveIsMonotonePathwise) {
  // Thinning nests the node sets, and path-loss edges only grow with more
  // nodes, so per-seed success counts are non-decreasing in the ratio.
  std::uint64_t prev = 0;
  for (double ratio : {1.0, 2.0, 3.0, 4.0, 6.0}) {
    const auto e = est::coupled_spanning(ratio, 6.0, 1.0, 6.0, 0.6, {}, est::SpanningMode::directed,
                                         budget(80, 12));
    EXPECT_GE(e.successes, prev) << ratio;
    prev = e.successes;
  }
}

TEST(LambdaC, BracketErrorWhenNotStraddling) {
  est::LambdaCSearch s;
  s.half_widths = {5.0};
  s.ratio_lo = 0.05;
  s.ratio_hi = 0.1;
  EXPECT_THROW(est::estimate_lambda_c(1.0, {}, s, budget(20, 1)), BracketError);
}

TEST(LambdaC, SmallSearch) {
  est::LambdaCSearch s;
  s.half_widths = {6.0, 8.0};
  s.ratio_lo = 0.5;
  s.ratio_hi = 12.0;
  s.tol = 0.25;
  const auto r = est::estimate_lambda_c(1.0, {}, s, budget(60, 3));
  ASSERT_EQ(r.curves.size(), 2u);
  EXPECT_EQ(r.curves.back().half_width, 8.0);
  EXPECT_GT(r.ratio_hat, s.ratio_lo);
  EXPECT_LT(r.ratio_hat, s.ratio_hi);
  EXPECT_LE(r.ratio_ci.low, r.ratio_hat);
  EXPECT_GE(r.ratio_ci.high, r.ratio_hat);
  for (const auto& w : r.curves) {
    for (std::size_t i = 1; i < w.curve.size(); ++i) {
      EXPECT_GE(w.curve[i].ratio, w.curve[i - 1].ratio);
      // Coupled samples: success counts never decrease along the curve.
      EXPECT_GE(w.curve[i].estimate.successes, w.curve[i - 1].estimate.successes);
    }
  }
}

TEST(MeanRhoSq, MatchesInverseArea) {
  const auto a = est::estimate_mean_rho_sq(1.0, 100000, budget(1, 21));
  EXPECT_NEAR(a.mean, 1.0 / pi, 3.0 * a.standard_error);
  const auto b = est::estimate_mean_rho_sq(2.0, 100000, budget(1, 22));
  EXPECT_NEAR(b.mean, 0.5 / pi, 3.0 * b.standard_error);
  EXPECT_THROW(est::estimate_mean_rho_sq(1.0, 50, budget(1, 1)), ParameterError);
}

TEST(MeanRhoSq, VoidProbabilityPointwise) {
  const std::uint64_t n = 40000;
  const auto rho = est::sample_rho(1.0, n, budget(1, 31));
  for (double s : {0.5, 1.0, 2.0}) {
    double count = 0;
    for (double r : rho) count += r > s;
    const double p = std::exp(-pi * s * s);
    EXPECT_NEAR(count / n, p, 3.0 * std::sqrt(p * (1 - p) / n) + 1.0 / n) << s;
  }
}

TEST(DeLtDl, SymmetryAndClosedForm) {
  const auto sym = est::estimate_prob_De_lt_Dl(1.0, 1.0, 0.0, budget(20000, 41));
  EXPECT_NEAR(sym.p_hat, 0.5, 3.0 * sym.standard_error());
  const auto e = est::estimate_prob_De_lt_Dl(1.0, 0.5, 1.0, budget(50000, 42));
  EXPECT_NEAR(e.p_hat, 0.861413, 3.0 * e.standard_error());
  EXPECT_THROW(est::estimate_prob_De_lt_Dl(1.0, 1.0, -1.0, budget(1, 1)), ParameterError);
}

TEST(DeLtDl, ExcessDistanceLaw) {
  const auto xs = est::sample_excess_distance(1.0, 1.0, 10000, budget(1, 43));
  const double ks = stats::ks_distance(xs, [](double x) { return analytic::excess_distance_cdf(1.0, 1.0, x); });
  EXPECT_LT(ks, 0.02);
  for (double x : xs) EXPECT_GE(x, 0.0);
}

TEST(DeltaGamma, SymmetryAtZeroInnerRadius) {
  const double rmax = analytic::required_power_radius(1.0, 1.0, 4.0);
  const auto e = est::estimate_prob_Delta_gt_Gamma(1.0, 1.0, 4.0, 0.0, rmax, budget(20000, 51));
  EXPECT_NEAR(e.p_hat, 0.5, 3.0 * e.standard_error());
}

TEST(DeltaGamma, RejectsShortTruncationRadius) {
  const double rmax = analytic::required_power_radius(1.0, 1.0, 4.0);
  EXPECT_THROW(est::estimate_prob_Delta_gt_Gamma(1.0, 1.0, 4.0, 1.0, 0.5 * rmax, budget(1, 1)),
               ParameterError);
  EXPECT_THROW(est::estimate_prob_Delta_gt_Gamma(1.0, 0.0, 4.0, 1.0, 10.0, budget(1, 1)), ParameterError);
}

TEST(DeltaGamma, FadeThresholdRegionMatchesClosedForm) {
  const double rmax = analytic::required_power_radius(1.0, 1.0, 4.0);
  const auto e = est::estimate_prob_Delta_gt_Gamma(1.0, 1.0, 4.0, 1.0, rmax, budget(20000, 52),
                                                   est::GammaRegion::fade_threshold);
  EXPECT_NEAR(e.p_hat, analytic::prob_Delta_gt_Gamma_closed(1, 1, 4, 1), 3.0 * e.standard_error() + 1e-3);
}

TEST(DeltaGamma, AnnulusRegionMatchesGeometricOracle) {
  const double oracle = annulus_delta_gt_gamma(1.0, 1.0, 4.0, 1.0);
  EXPECT_NEAR(oracle, 0.94299, 5e-5);
  const double rmax = analytic::required_power_radius(1.0, 1.0, 4.0);
  const auto e = est::estimate_prob_Delta_gt_Gamma(1.0, 1.0, 4.0, 1.0, rmax, budget(20000, 53));
  EXPECT_NEAR(e.p_hat, oracle, 3.0 * e.standard_error() + 1e-3);
}

TEST(DeltaGamma, MarkedCdfs) {
  const double rmax = analytic::required_power_radius(1.0, 1.0, 4.0);
  const auto pairs = est::sample_power_pairs(1.0, 1.0, 4.0, 1.0, rmax, 10000, budget(1, 54),
                                             est::GammaRegion::fade_threshold);
  std::vector<double> d, g;
  for (const auto& p : pairs) {
    d.push_back(p.delta);
    g.push_back(p.gamma);
  }
  const analytic::MarkedCdfs m(4.0);
  EXPECT_LT(stats::ks_distance(d, [&](double x) { return x <= 0 ? 0.0 : m.delta_cdf(x, 1.0); }), 0.02);
  EXPECT_LT(stats::ks_distance(g, [&](double x) { return x <= 0 ? 0.0 : m.gamma_cdf(x, 1.0, 1.0); }), 0.02);
}

TEST(Recursion, TrivialAndSyntheticCases) {
  const auto zero = est::check_recursion_inequality(0.0, 1.0, 1.0, 12800.0, budget(20, 1));
  EXPECT_TRUE(zero.satisfied);
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_EQ(zero.rhs, 0.0);

  const auto lhs = stats::make_estimate(5000, 10000, 0);
  const auto small = stats::make_estimate(0, 10000, 0);
  const auto ac = stats::make_estimate(1000, 10000, 0);
  const auto v = est::evaluate_recursion(lhs, small, ac, 1.0);
  EXPECT_NEAR(v.lhs, 0.5, 1e-15);
  EXPECT_NEAR(v.rhs, 0.1, 1e-15);
  EXPECT_FALSE(v.satisfied);
}

TEST(Recursion, SatisfiedAtLowIntensity) {
  const auto r = est::check_recursion_inequality(0.05, 1.0, 1.0, 12800.0, budget(150, 61));
  EXPECT_TRUE(r.satisfied);
  EXPECT_LE(r.b_small.p_hat, 1.0);
}

TEST(Transform, EscapeImpliesBOrAComplement) {
  const auto t = est::estimate_transform_check(0.6, 1.0, 1.0, budget(200, 71));
  EXPECT_EQ(t.pathwise_violations, 0u);
  EXPECT_LE(t.escape.p_hat, t.b.p_hat + t.a_complement.p_hat);
}

TEST(GourrePremises, CurvesAtTinyIntensity) {
  // No event is ever seen, so f is C times the Wilson upper limit of 0/n;
  // proving f <= 1/2 this way would need n of order 10^5.
  const auto c = analytic::covering_constants();
  const double rs[] = {1.0, 5.0, 10.0};
  const auto p = est::estimate_gourre_premises(1.0, c.c, rs, budget(200, 81));
  EXPECT_NEAR(p.lambda, pi / (4.0 * c.c * c.c), 1e-20);
  ASSERT_EQ(p.f.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p.b_estimates[i].successes, 0u);
    EXPECT_DOUBLE_EQ(p.f[i].value, c.c * stats::wilson_interval(0, 200).high);
  }
  for (const auto& g : p.g) EXPECT_LE(g.value, 0.25);
}

TEST(Determinism, WorkerCountDoesNotMatter) {
  const auto a = est::estimate_event_B(1.0, 1.0, 1.0, {}, budget(120, 91, 1));
  const auto b = est::estimate_event_B(1.0, 1.0, 1.0, {}, budget(120, 91, 4));
  EXPECT_EQ(a.successes, b.successes);
  const auto c = est::estimate_mean_rho_sq(1.0, 5000, budget(1, 92, 1));
  const auto d = est::estimate_mean_rho_sq(1.0, 5000, budget(1, 92, 3));
  EXPECT_EQ(c.mean, d.mean);
  const auto e = est::estimate_spanning(2.0, 1.0, 5.0, 0.5, {}, est::SpanningMode::either, budget(50, 93, 1));
  const auto f = est::estimate_spanning(2.0, 1.0, 5.0, 0.5, {}, est::SpanningMode::either, budget(50, 93, 2));
  EXPECT_EQ(e.successes, f.successes);
}

TEST(BudgetTest, Validation) {
  est::Budget b;
  b.trials = 0;
  EXPECT_THROW(b.validate(), ParameterError);
  b.trials = 1;
  b.truncation_tol = 1.0;
  EXPECT_THROW(b.validate(), ParameterError);
}
