#pragma once

// Central finite-difference stencils. The callable may return double or any
// fixed-size Eigen type; results are materialized into that type.

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <utility>

namespace wk::numdiff {

template <class F>
using result_t = std::decay_t<std::invoke_result_t<F&, double>>;

// Second-order central difference.
template <class F>
result_t<F> central(F&& f, double x, double h) {
  result_t<F> r = (f(x + h) - f(x - h)) / (2.0 * h);
  return r;
}

// One Richardson level on top of central(): O(h^4).
template <class F>
result_t<F> richardson(F&& f, double x, double h) {
  result_t<F> coarse = central(f, x, h);
  result_t<F> fine = central(f, x, 0.5 * h);
  result_t<F> r = (4.0 * fine - coarse) / 3.0;
  return r;
}

// Five-point first-derivative stencil: O(h^4).
template <class F>
result_t<F> five_point(F&& f, double x, double h) {
  result_t<F> r = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
  return r;
}

// Step scaled with the magnitude of the abscissa.
inline double scaled_step(double base, double x) { return base * std::max(1.0, std::abs(x)); }

// First derivative from five equally spaced samples f(x-2h) .. f(x+2h).
template <class T>
T five_point_from_samples(const T& m2, const T& m1, const T& p1, const T& p2, double h) {
  T r = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
  return r;
}

}  // namespace wk::numdiff
