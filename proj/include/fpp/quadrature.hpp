#pragma once

#include <cmath>
#include <stdexcept>

namespace fpp {

// Adaptive Simpson integration with absolute tolerance. Depth-limited
// recursion; the 15x factor is the standard error estimate for the
// composite rule.
namespace detail {

inline double simpson_step(double a, double fa, double b, double fb,
                           double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive(F&& f, double a, double fa, double b, double fb, double m,
                double fm, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_step(a, fa, m, fm, flm);
  double right = simpson_step(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12,
                 int max_depth = 60) {
  if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = detail::simpson_step(a, fa, b, fb, fm);
  return detail::adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace fpp
