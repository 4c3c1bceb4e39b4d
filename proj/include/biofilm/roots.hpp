#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "biofilm/errors.hpp"

namespace biofilm {

struct RootResult {
  double root = 0.0;
  double value = 0.0;     ///< f(root)
  double lo = 0.0;        ///< final bracket
  double hi = 0.0;
  int evaluations = 0;
};

struct BrentOptions {
  double x_tol = 1e-14;   ///< absolute bracket-width tolerance
  double rel_tol = 4e-16; ///< relative bracket-width tolerance
  double f_tol = 0.0;     ///< stop as soon as |f| <= f_tol
  int max_iter = 200;
};

/// Brent's method on a bracket [a, b] with f(a) f(b) <= 0.
/// fa and fb may be supplied to avoid re-evaluating the end points.
template <class F>
RootResult brent(F &&f, double a, double b, double fa, double fb, BrentOptions opt = {}) {
  RootResult res;
  if (fa == 0.0) return {a, fa, a, a, 0};
  if (fb == 0.0) return {b, fb, b, b, 0};
  if ((fa > 0) == (fb > 0)) throw DomainError("brent: end points do not bracket a root");

  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < opt.max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * opt.rel_tol * std::abs(b) + 0.5 * opt.x_tol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0 || std::abs(fb) <= opt.f_tol) {
      res.root = b;
      res.value = fb;
      res.lo = std::min(b, c);
      res.hi = std::max(b, c);
      return res;
    }
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
    fb = f(b);
    ++res.evaluations;
  }
  throw IterationFailure("brent: maximum iterations reached", std::abs(fb), opt.max_iter);
}

template <class F> RootResult brent(F &&f, double a, double b, BrentOptions opt = {}) {
  const double fa = f(a), fb = f(b);
  auto r = brent(f, a, b, fa, fb, opt);
  r.evaluations += 2;
  return r;
}

struct Bracket {
  double lo, hi, f_lo, f_hi;
};

/// Grows [lo, hi] geometrically (lo /= factor, hi *= factor) within [floor, ceiling]
/// until f changes sign. Suited to positive abscissae such as heights.
template <class F>
std::optional<Bracket> expand_bracket(F &&f, double lo, double hi, double floor, double ceiling,
                                      double factor = 2.0) {
  double flo = f(lo), fhi = f(hi);
  if ((flo > 0) != (fhi > 0) || flo == 0.0 || fhi == 0.0) return Bracket{lo, hi, flo, fhi};
  // Every point evaluated so far lies in [a, b] and shares one sign.
  double a = lo, fa = flo, b = hi, fb = fhi;
  for (;;) {
    const bool can_lo = a / factor >= floor;
    const bool can_hi = b * factor <= ceiling;
    if (!can_lo && !can_hi) return std::nullopt;
    // Move the end whose value is smaller in magnitude; the root is more likely beyond it.
    if (can_hi && (!can_lo || std::abs(fb) <= std::abs(fa))) {
      const double x = b * factor, fx = f(x);
      if ((fx > 0) != (fb > 0) || fx == 0.0) return Bracket{b, x, fb, fx};
      b = x;
      fb = fx;
    } else {
      const double x = a / factor, fx = f(x);
      if ((fx > 0) != (fa > 0) || fx == 0.0) return Bracket{x, a, fx, fa};
      a = x;
      fa = fx;
    }
  }
}

} // namespace biofilm
