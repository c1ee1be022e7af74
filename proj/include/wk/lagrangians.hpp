#pragma once

// Lagrangians that depend on a curve only through the differential invariants
//   gamma = <u,u>,  beta = <u,u'>,  alpha = <u',u'>.
// A Lagrangian is any callable evaluable on double and on the forward-mode
// scalar types from series.hpp.

#include <array>
#include <cmath>
#include <concepts>
#include <string>
#include <variant>

#include "wk/series.hpp"

namespace wk {

template <class L>
concept InvariantLagrangian = requires(const L& lag, double d, Dual<Series<2>> s) {
  { lag(d, d, d) } -> std::convertible_to<double>;
  lag(s, s, s);
};

// L = (k^2 + A)|u| written through the invariants:
//   (alpha gamma - beta^2) / gamma^{5/2} + A gamma^{1/2}.
struct KawaguchiLagrangian {
  double A = 0.0;
  // Frequency of the associated flat-space helix; consumed by validators only.
  double omega = 0.0;

  template <class T>
  T operator()(const T& gamma, const T& beta, const T& alpha) const {
    using std::pow;
    using std::sqrt;
    return (alpha * gamma - beta * beta) / pow(gamma, 2.5) + A * sqrt(gamma);
  }
};

// L = |u| (1 + c k^4) = gamma^{1/2} + c (alpha gamma - beta^2)^2 / gamma^{11/2}.
// Homogeneous of degree one and depends on all three invariants.
struct QuarticCurvatureLagrangian {
  double c = 0.1;

  template <class T>
  T operator()(const T& gamma, const T& beta, const T& alpha) const {
    using std::pow;
    using std::sqrt;
    const T w = alpha * gamma - beta * beta;
    return sqrt(gamma) + c * (w * w) / pow(gamma, 5.5);
  }
};

using AnyLagrangian = std::variant<KawaguchiLagrangian, QuarticCurvatureLagrangian>;

inline std::string lagrangian_name(const AnyLagrangian& l) {
  return std::holds_alternative<KawaguchiLagrangian>(l) ? "kawaguchi" : "test2";
}

// (dL/dgamma, dL/dbeta, dL/dalpha) by forward-mode differentiation.
template <class T, InvariantLagrangian L>
std::array<T, 3> lagrangian_partials(const L& lag, const T& gamma, const T& beta, const T& alpha) {
  using D = Dual<T>;
  const T zero(0.0), one(1.0);
  return {lag(D(gamma, one), D(beta, zero), D(alpha, zero)).d,
          lag(D(gamma, zero), D(beta, one), D(alpha, zero)).d,
          lag(D(gamma, zero), D(beta, zero), D(alpha, one)).d};
}

// Riewe constraint k^2 = A/3 + 2 omega^2 / 3 solved for A, with k^2 read as the
// invariant (alpha gamma - beta^2)/gamma^3 (= alpha in natural gauge).
inline double riewe_constraint_A(double k2, double omega) { return 3.0 * k2 - 2.0 * omega * omega; }

}  // namespace wk
