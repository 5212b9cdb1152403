// Prints the covering constants and the critical-intensity bounds at
// lambda_e = 1, alpha = 4, next to a Monte Carlo estimate of P(B(0, r)).

#include <cstdio>

#include "secperc/secperc.hpp"

int main() {
  using namespace secperc;
  const auto k = analytic::covering_constants();
  std::printf("|K| = %zu  |L| = %zu  C3 = %.0f  C = %.0f\n", k.k_count, k.l_count, k.c3, k.c);

  const auto eps = analytic::default_epsilon_grid();
  const auto n1 = analytic::default_n1_grid();
  const auto r = analytic::bounds_report(1.0, 4.0, 16.0, k, eps, n1);
  std::printf("path-loss: %.3g < lambda_c < %.6g  (eps %.1f, N1 %.0f)\n", r.theorem1_lower,
              r.theorem2_upper.value, r.theorem2_upper.epsilon, r.theorem2_upper.n1);
  std::printf("fading:    %.3g < lambda_c < %.6g  (eps %.1f, N1 %.0f)\n", r.theorem3_lower,
              r.theorem4_upper.value, r.theorem4_upper.epsilon, r.theorem4_upper.n1);

  est::Budget b;
  b.trials = 2000;
  b.seed = 1;
  for (double radius : {1.0, 2.0, 4.0}) {
    const auto e = est::estimate_event_B(0.05, 1.0, radius, ModelParams{}, b);
    std::printf("P(B(0,%g)) = %.4f  [%.4f, %.4f]\n", radius, e.p_hat, e.ci_low, e.ci_high);
  }
}
