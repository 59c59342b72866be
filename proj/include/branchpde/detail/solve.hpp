#pragma once

// Safeguarded Newton iteration for increasing scalar functions: Newton steps
// that leave the current bracket fall back to bisection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace branchpde::detail {

struct Eval {
  double value;
  double derivative;
};

/// Root of an increasing f on [a, b] with f(a) <= 0 <= f(b); absolute tolerance.
template <class F>
double solve_increasing_bracketed(F&& f, double a, double b, double guess, double tol, int max_iter = 200) {
  double x = (guess > a && guess < b) ? guess : 0.5 * (a + b);
  for (int it = 0; it < max_iter; ++it) {
    const Eval e = f(x);
    if (e.value == 0.0) return x;
    if (e.value < 0.0) a = x; else b = x;
    double next = x - e.value / e.derivative;
    if (std::isfinite(next) && std::abs(next - x) <= tol) return std::clamp(next, a, b);
    if (!std::isfinite(next) || next <= a || next >= b) next = 0.5 * (a + b);
    if (std::abs(next - x) <= tol || b - a <= tol) return next;
    x = next;
  }
  return x;
}

/// Root of an increasing f on (0, inf); relative tolerance. Starts from
/// `guess`; until both bracket ends are known, failed Newton steps expand by a
/// factor 4, afterwards they bisect geometrically.
template <class F>
double solve_increasing_positive(F&& f, double guess, double rel_tol, int max_iter = 400) {
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();
  double x = guess;
  for (int it = 0; it < max_iter; ++it) {
    const Eval e = f(x);
    if (e.value == 0.0) return x;
    if (e.value < 0.0) a = x; else b = x;
    double next = x - e.value / e.derivative;
    if (std::isfinite(next) && std::abs(next - x) <= rel_tol * x) return std::clamp(next, a, b);
    if (!std::isfinite(next) || next <= a || next >= b) {
      if (std::isinf(b)) next = 4.0 * x;
      else if (a == 0.0) next = 0.25 * x;
      else next = (b > 2.0 * a) ? std::sqrt(a * b) : 0.5 * (a + b);
    }
    if (std::abs(next - x) <= rel_tol * next || (b - a) <= rel_tol * a) return next;
    x = next;
  }
  throw std::runtime_error("solve_increasing_positive: no convergence");
}

}  // namespace branchpde::detail
