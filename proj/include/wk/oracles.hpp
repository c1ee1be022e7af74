#pragma once

// Brute-force verifiers that work on the coordinate expression L(x, u, udot)
// and never touch the covariant momenta or the curvature tensor:
//
//   p1_n = dL/dudot^n,   p_n = dL/du^n - dp1_n/dxi,   E_n = dL/dx^n - dp_n/dxi.
//
// Partials of L are central differences with one Richardson level; parameter
// derivatives along the curve use five-point stencils.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>

#include "wk/curves.hpp"
#include "wk/errors.hpp"
#include "wk/geometry.hpp"
#include "wk/numdiff.hpp"
#include "wk/variational.hpp"

namespace wk {

struct OracleSteps {
  double partial = 1e-3;  // base step for L-partials (scaled by |component|)
  double xi = 1e-2;       // step for parameter derivatives along the curve
  double richardson_tolerance = 1e-3;
};

template <std::size_t N>
struct CoordinateMomenta {
  Vec<N> p1 = Vec<N>::Zero();
  Vec<N> p = Vec<N>::Zero();
};

namespace detail {

template <std::size_t N, class CoordL>
Vec<N> coordinate_p1(const CoordL& Lc, const CoordinateJet<N>& j, double step) {
  return numeric_gradient<N>([&](const Vec<N>& w) { return Lc(j.x, j.u, w); }, j.udot, step);
}

template <std::size_t N, class CoordL>
Vec<N> coordinate_p(const CoordL& Lc, const CoordinateCurve<N>& curve, double xi, const OracleSteps& st,
                    double hxi) {
  const auto j = curve.jet(xi);
  const Vec<N> dLdu = numeric_gradient<N>([&](const Vec<N>& w) { return Lc(j.x, w, j.udot); }, j.u, st.partial);
  auto p1 = [&](double t) { return coordinate_p1<N>(Lc, curve.jet(t), st.partial); };
  return dLdu - numdiff::five_point(p1, xi, hxi);
}

template <std::size_t N>
struct EpAtStep {
  Vec<N> E;
  double scale;  // magnitude of the terms E is assembled from
};

template <std::size_t N, class CoordL>
EpAtStep<N> coordinate_ep_at_step(const CoordL& Lc, const CoordinateCurve<N>& curve, double xi,
                                  const OracleSteps& st, double hxi) {
  const auto j = curve.jet(xi);
  const Vec<N> dLdx = numeric_gradient<N>([&](const Vec<N>& w) { return Lc(w, j.u, j.udot); }, j.x, st.partial);
  auto p = [&](double t) { return coordinate_p<N>(Lc, curve, t, st, hxi); };
  const Vec<N> dp = numdiff::five_point(p, xi, hxi);
  return {dLdx - dp, std::max({dLdx.norm(), dp.norm(), p(xi).norm()})};
}

}  // namespace detail

template <std::size_t N, class CoordL>
CoordinateMomenta<N> coordinate_momenta(const CoordL& Lc, const CoordinateCurve<N>& curve, double xi,
                                        const OracleSteps& st = {}) {
  CoordinateMomenta<N> m;
  m.p1 = detail::coordinate_p1<N>(Lc, curve.jet(xi), st.partial);
  // same extrapolation as for E below
  const Vec<N> coarse = detail::coordinate_p<N>(Lc, curve, xi, st, st.xi);
  const Vec<N> fine = detail::coordinate_p<N>(Lc, curve, xi, st, 0.5 * st.xi);
  m.p = (16.0 * fine - coarse) / 15.0;
  return m;
}

// E_n = dL/dx^n - dp_n/dxi at steps h and h/2. The two must agree to the
// Richardson tolerance; the returned value is their extrapolation
// (16 E(h/2) - E(h)) / 15, since truncation dominates round-off at these steps.
template <std::size_t N, class CoordL>
Vec<N> coordinate_euler_poisson(const CoordL& Lc, const CoordinateCurve<N>& curve, double xi,
                                const OracleSteps& st = {}) {
  const auto coarse = detail::coordinate_ep_at_step<N>(Lc, curve, xi, st, st.xi);
  const auto fine = detail::coordinate_ep_at_step<N>(Lc, curve, xi, st, 0.5 * st.xi);
  // Relative to E itself, or to the terms it is the difference of when E is
  // near zero.
  const double scale = std::max({fine.E.norm(), 1e-5 * fine.scale, 1e-12});
  if ((coarse.E - fine.E).norm() > st.richardson_tolerance * scale)
    throw DifferentiationFailure("coordinate Euler-Poisson: step halving changed the result by " +
                                 std::to_string((coarse.E - fine.E).norm() / scale));
  return (16.0 * fine.E - coarse.E) / 15.0;
}

struct RecalculationResidual {
  double velocity = 0.0;  // dL/du   vs  dLt/du + 2 dLt/du'^q Gamma^q_mn u^m
  double position = 0.0;  // dL/dx   vs  dLt/dx + dLt/du'^q dGamma^q_ml/dx^n u^l u^m
};

// Chain rule of the change {x, u, udot} -> {x, u, u'} checked with numeric
// partials on both sides. Residuals are relative to max(1, |lhs|).
template <std::size_t N, InvariantLagrangian L>
RecalculationResidual partials_recalculation_check(const CoordinateLagrangian<N, L>& Lc, const Vec<N>& x,
                                                   const Vec<N>& u, const Vec<N>& udot, double step = 1e-3) {
  const auto& chart = Lc.chart();
  const Christoffel<N> c = chart.christoffel_at(x, true);
  const Vec<N> u1 = udot + detail::contract<N>(c.gamma, u, u);

  const Vec<N> dLdu = numeric_gradient<N>([&](const Vec<N>& w) { return Lc(x, w, udot); }, u, step);
  const Vec<N> dLdx = numeric_gradient<N>([&](const Vec<N>& w) { return Lc(w, u, udot); }, x, step);

  const Vec<N> dLt_du = numeric_gradient<N>([&](const Vec<N>& w) { return Lc.tilde(x, w, u1); }, u, step);
  const Vec<N> dLt_dx = numeric_gradient<N>([&](const Vec<N>& w) { return Lc.tilde(w, u, u1); }, x, step);
  const Vec<N> dLt_du1 = numeric_gradient<N>([&](const Vec<N>& w) { return Lc.tilde(x, u, w); }, u1, step);

  Vec<N> rhs_u = dLt_du, rhs_x = dLt_dx;
  for (std::size_t q = 0; q < N; ++q) {
    rhs_u += 2.0 * dLt_du1[q] * (c.gamma[q] * u);
    for (std::size_t n = 0; n < N; ++n) rhs_x[n] += dLt_du1[q] * u.dot(c.dgamma[n][q] * u);
  }
  RecalculationResidual r;
  r.velocity = (dLdu - rhs_u).cwiseAbs().maxCoeff() / std::max(1.0, dLdu.cwiseAbs().maxCoeff());
  r.position = (dLdx - rhs_x).cwiseAbs().maxCoeff() / std::max(1.0, dLdx.cwiseAbs().maxCoeff());
  return r;
}

// Composite Simpson rule with `intervals` (even) subintervals.
template <class F>
double simpson(F&& f, double a, double b, std::size_t intervals) {
  if (intervals < 2 || intervals % 2 != 0) throw QuadratureFailure("simpson: need an even interval count");
  const double h = (b - a) / static_cast<double>(intervals);
  double acc = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return acc * h / 3.0;
}

template <std::size_t N, class CoordL>
double action(const CoordL& Lc, const CoordinateCurve<N>& curve, std::size_t intervals) {
  return simpson(
      [&](double xi) {
        const auto j = curve.jet(xi);
        return Lc(j.x, j.u, j.udot);
      },
      curve.begin(), curve.end(), intervals);
}

struct ActionVariation {
  double derivative = 0.0;  // [S(c + eps b) - S(c - eps b)] / (2 eps)
  double pairing = 0.0;     // int E_n b^n dxi with the covariant E
};

// First-principles check that the covariant E is the variational derivative
// of the action. The bump must vanish with its first derivative at both ends
// of the curve window.
template <std::size_t N, InvariantLagrangian L>
ActionVariation action_variation(const SpacetimeChart<N>& chart, const L& lag, const CoordinateCurve<N>& curve,
                                 const CoordinateCurve<N>& bump, double eps = 1e-4,
                                 std::size_t intervals = 2000) {
  const CoordinateLagrangian<N, L> Lc(chart, lag);
  auto derivative_at = [&](std::size_t n) {
    const double plus = action<N>(Lc, curve.plus(bump, eps), n);
    const double minus = action<N>(Lc, curve.plus(bump, -eps), n);
    return (plus - minus) / (2.0 * eps);
  };
  auto pairing_at = [&](std::size_t n) {
    return simpson(
        [&](double xi) {
          const auto b = bump.derivatives(xi)[0];
          if (b.isZero(0.0)) return 0.0;
          const auto jet = jet_coordinate_to_covariant(chart, curve.jet(xi), xi);
          return euler_poisson_covariant(chart.at(jet.x), jet, lag).E.dot(b);
        },
        curve.begin(), curve.end(), n);
  };
  ActionVariation out;
  out.derivative = derivative_at(intervals);
  out.pairing = pairing_at(intervals);
  const double half_d = derivative_at(intervals / 2), half_p = pairing_at(intervals / 2);
  // Floor at the round-off level of the central difference of the action.
  const double floor = 1e-9 * std::max(1.0, std::abs(action<N>(Lc, curve, intervals))) / eps;
  const double scale = std::max({std::abs(out.derivative), std::abs(out.pairing), floor});
  if (std::abs(half_d - out.derivative) > 1e-3 * scale || std::abs(half_p - out.pairing) > 1e-3 * scale)
    throw QuadratureFailure("action variation: quadrature not converged");
  return out;
}

// Degree-6 coordinate polynomial around the line x0 + v xi, coefficients of
// every order drawn uniformly from [-spread, spread] in units of proper
// length at x0 (component i is divided by sqrt|g_ii(x0)|); redrawn until
// gamma > 0.1 at every sample of the window.
template <std::size_t N, class Rng>
CoordinateCurve<N> random_polynomial_curve(const SpacetimeChart<N>& chart, const Vec<N>& x0, const Vec<N>& v,
                                           Rng& rng, double xi0 = -1.0, double xi1 = 1.0, double spread = 0.1,
                                           int max_attempts = 1000) {
  std::uniform_real_distribution<double> coef(-spread, spread);
  const Mat<N> g0 = chart.metric(x0);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Vec<N>> c(7);
    for (auto& ck : c)
      for (std::size_t i = 0; i < N; ++i) ck[i] = coef(rng) / std::sqrt(std::abs(g0(i, i)));
    c[0] += x0;
    c[1] += v;
    auto curve = polynomial_curve<N>(c, xi0, xi1);
    bool ok = true;
    for (int s = 0; s <= 40 && ok; ++s) {
      const double xi = xi0 + (xi1 - xi0) * s / 40.0;
      const auto j = curve.jet(xi);
      try {
        const Mat<N> g = chart.metric(j.x);
        ok = j.u.dot(g * j.u) > 0.1;
      } catch (const OutOfChart&) {
        ok = false;
      }
    }
    if (ok) return curve;
  }
  throw Error("random_polynomial_curve: no admissible curve found");
}

}  // namespace wk
