#pragma once

#include <cmath>
#include <concepts>
#include <limits>

#include "quest/error.hpp"

namespace quest {

/// Interval [lo, hi] with function values of strictly opposite sign.
struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;
};

template <typename F>
concept ScalarFunction = requires(F f, double x) {
  { f(x) } -> std::convertible_to<double>;
};

template <ScalarFunction F>
Bracket make_bracket(F&& f, double lo, double hi) {
  return Bracket{lo, hi, f(lo), f(hi)};
}

struct RootResult {
  double x;
  double fx;
  int iterations;
};

inline constexpr double kDefaultRootTol = 1e-12;
inline constexpr int kDefaultRootMaxIter = 200;

/// Brent's zero finder: inverse quadratic / secant steps with a bisection
/// safeguard, so the bracket shrinks monotonically.
///
/// Stops once the bracket around the best iterate is narrower than
/// x_tol * max(1, |x|) (plus a few ulps). Throws QuestError for an invalid
/// bracket and RootNotConverged when max_iter is exhausted. An endpoint with
/// an exact zero is returned as is.
template <ScalarFunction F>
RootResult find_zero(F&& f, const Bracket& bracket, double x_tol = kDefaultRootTol,
                     int max_iter = kDefaultRootMaxIter) {
  if (!(bracket.lo < bracket.hi)) throw QuestError(Stage::root, "invalid bracket (lo >= hi)");
  if (bracket.f_lo == 0.0) return {bracket.lo, 0.0, 0};
  if (bracket.f_hi == 0.0) return {bracket.hi, 0.0, 0};
  if (!(std::isfinite(bracket.f_lo) && std::isfinite(bracket.f_hi)) ||
      std::signbit(bracket.f_lo) == std::signbit(bracket.f_hi)) {
    throw QuestError(Stage::root, "invalid bracket (no sign change)");
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double a = bracket.lo, b = bracket.hi, c = bracket.hi;
  double fa = bracket.f_lo, fb = bracket.f_hi, fc = bracket.f_hi;
  double d = b - a, e = d;

  for (int iter = 1; iter <= max_iter; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = eps * std::abs(b) + 0.5 * x_tol * std::max(1.0, std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return {b, fb, iter};

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw RootNotConverged(b, fb, max_iter);
}

}  // namespace quest
