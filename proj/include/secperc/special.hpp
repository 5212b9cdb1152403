#pragma once

// Incomplete gamma functions and adaptive Gauss-Kronrod quadrature.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "secperc/errors.hpp"

namespace secperc::special {

namespace detail {

inline constexpr int kMaxIter = 10000;
inline constexpr double kEps = 1e-16;

// Lower regularized P(s, x) by its power series; converges for x < s + 1.
inline double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Upper regularized Q(s, x) by modified Lentz continued fraction; x >= s + 1.
inline double gamma_q_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
inline double gamma_q(double s, double x) {
  if (!(s > 0.0)) throw ParameterError("incomplete gamma shape must be positive");
  if (x < 0.0) throw ParameterError("incomplete gamma argument must be non-negative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return 1.0 - detail::gamma_p_series(s, x);
  return detail::gamma_q_fraction(s, x);
}

/// Regularized lower incomplete gamma P(s, x).
inline double gamma_p(double s, double x) {
  if (!(s > 0.0)) throw ParameterError("incomplete gamma shape must be positive");
  if (x < 0.0) throw ParameterError("incomplete gamma argument must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < s + 1.0) return detail::gamma_p_series(s, x);
  return 1.0 - detail::gamma_q_fraction(s, x);
}

/// Non-regularized upper incomplete gamma: integral of t^(s-1) e^(-t) over [x, inf).
inline double upper_gamma(double s, double x) { return std::tgamma(s) * gamma_q(s, x); }

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// 15-point Kronrod nodes/weights and the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {kronrod * half, std::fabs((kronrod - gauss) * half), 1};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) on a finite interval, bisecting the
/// interval with the largest error estimate until the total error meets the
/// absolute or relative tolerance.
inline QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                            double abs_tol = 1e-14, double rel_tol = 1e-13,
                            int max_intervals = 4000) {
  if (!(b > a)) return {};
  struct Piece {
    double a, b;
    QuadResult r;
  };
  std::vector<Piece> pieces{{a, b, detail::gk15(f, a, b)}};
  for (;;) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      total += pieces[i].r.value;
      err += pieces[i].r.error;
      if (pieces[i].r.error > pieces[worst].r.error) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::fabs(total)) ||
        static_cast<int>(pieces.size()) >= max_intervals)
      return {total, err, static_cast<int>(pieces.size())};
    const Piece p = pieces[worst];
    const double mid = 0.5 * (p.a + p.b);
    pieces[worst] = {p.a, mid, detail::gk15(f, p.a, mid)};
    pieces.push_back({mid, p.b, detail::gk15(f, mid, p.b)});
  }
}

/// Integral over [a, inf) via the map x = a + t / (1 - t), t in [0, 1).
inline QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                        double abs_tol = 1e-14, double rel_tol = 1e-13) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    const double v = f(a + t / u);
    return std::isfinite(v) ? v / (u * u) : 0.0;
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol);
}

}  // namespace secperc::special
