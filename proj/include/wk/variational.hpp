#pragma once

// Second-order variational layer: covariant jets, invariants, covariant
// momenta and the covariant Euler-Poisson expression
//
//   E_n = -pi'_n - pi1_l R_nkm^l u^m u^k,
//   pi1_n = L_beta u_n + 2 L_alpha u'_n,
//   pi_n  = 2 L_gamma u_n + L_beta u'_n - pi1'_n.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "wk/errors.hpp"
#include "wk/geometry.hpp"
#include "wk/lagrangians.hpp"
#include "wk/numdiff.hpp"
#include "wk/series.hpp"

namespace wk {

// Sign applied to the curvature coupling term. Flipping it yields a build
// whose dynamics disagree with the Dixon and coordinate-space checks; the
// test suite uses such a build as a mutation check.
#ifdef WK_FLIP_CURVATURE_COUPLING
inline constexpr double kCouplingSign = -1.0;
#else
inline constexpr double kCouplingSign = 1.0;
#endif

inline constexpr double kGaugeTolerance = 1e-6;

// Point plus covariant velocity chain u, u', u'' (and optionally u''').
template <std::size_t N>
struct CovariantJet {
  Vec<N> x = Vec<N>::Zero();
  Vec<N> u = Vec<N>::Zero();
  Vec<N> u1 = Vec<N>::Zero();
  Vec<N> u2 = Vec<N>::Zero();
  std::optional<Vec<N>> u3;
  double param = 0.0;
  bool natural = false;

  const Vec<N>& third() const {
    if (!u3) throw Error("jet does not carry u'''");
    return *u3;
  }
};

// Ordinary parameter derivatives x, xdot, xddot, ... of a coordinate curve.
template <std::size_t N>
struct CoordinateJet {
  Vec<N> x = Vec<N>::Zero();
  Vec<N> u = Vec<N>::Zero();
  Vec<N> udot = Vec<N>::Zero();
  Vec<N> uddot = Vec<N>::Zero();
  Vec<N> udddot = Vec<N>::Zero();
};

struct Invariants {
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
};

template <std::size_t N>
struct Momenta {
  Vec<N> pi = Vec<N>::Zero();
  Vec<N> pi1 = Vec<N>::Zero();
  Vec<N> pi1_prime = Vec<N>::Zero();
};

template <std::size_t N>
struct EulerPoissonValue {
  Vec<N> E = Vec<N>::Zero();
};

template <std::size_t N>
Invariants invariants_at(const LocalGeometry<N>& geo, const CovariantJet<N>& jet) {
  Invariants inv{geo.inner(jet.u, jet.u), geo.inner(jet.u, jet.u1), geo.inner(jet.u1, jet.u1)};
  if (!(inv.gamma > 0.0)) throw NonTimelike("gamma = <u,u> is not positive");
  return inv;
}

template <std::size_t N>
Invariants invariants_at(const SpacetimeChart<N>& chart, const CovariantJet<N>& jet) {
  const Mat<N> g = chart.metric(jet.x);
  Invariants inv{jet.u.dot(g * jet.u), jet.u.dot(g * jet.u1), jet.u1.dot(g * jet.u1)};
  if (!(inv.gamma > 0.0)) throw NonTimelike("gamma = <u,u> is not positive");
  return inv;
}

// k^2 through the invariant combination (alpha gamma - beta^2) / gamma^3.
// Not a square: in Lorentzian signature it is negative for spacelike
// acceleration.
inline double frenet_curvature(const Invariants& inv) {
  if (!(inv.gamma > 0.0)) throw NonTimelike("gamma = <u,u> is not positive");
  return (inv.alpha * inv.gamma - inv.beta * inv.beta) / (inv.gamma * inv.gamma * inv.gamma);
}

template <std::size_t N>
double frenet_curvature(const LocalGeometry<N>& geo, const CovariantJet<N>& jet) {
  return frenet_curvature(invariants_at(geo, jet));
}

// pi1_l R_nkm^l u^m u^k
template <std::size_t N>
Vec<N> curvature_coupling(const Curvature<N>& curv, const Vec<N>& pi1, const Vec<N>& u) {
  Vec<N> f = Vec<N>::Zero();
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t k = 0; k < N; ++k) f[n] += u[k] * u.dot(curv.riemann[n][k] * pi1);
  return f;
}

namespace detail {

template <std::size_t K>
struct InvariantSeries {
  Series<K> gamma, beta, alpha;
};

// Invariants expanded along the curve. Order 1 needs u''; order 2 needs u'''.
// Uses gamma' = 2 beta, beta' = alpha + <u,u''>, alpha' = 2 <u',u''>.
template <std::size_t K, std::size_t N>
InvariantSeries<K> invariant_series(const LocalGeometry<N>& geo, const CovariantJet<N>& jet) {
  static_assert(K == 1 || K == 2);
  const Invariants inv = invariants_at(geo, jet);
  const double delta = geo.inner(jet.u, jet.u2);
  const double eps = geo.inner(jet.u1, jet.u2);
  InvariantSeries<K> s;
  s.gamma.c[0] = inv.gamma;
  s.gamma.c[1] = 2.0 * inv.beta;
  s.beta.c[0] = inv.beta;
  s.beta.c[1] = inv.alpha + delta;
  s.alpha.c[0] = inv.alpha;
  s.alpha.c[1] = 2.0 * eps;
  if constexpr (K == 2) {
    const Vec<N>& u3 = jet.third();
    s.gamma.c[2] = inv.alpha + delta;
    s.beta.c[2] = 0.5 * (3.0 * eps + geo.inner(jet.u, u3));
    s.alpha.c[2] = geo.inner(jet.u2, jet.u2) + geo.inner(jet.u1, u3);
  }
  return s;
}

}  // namespace detail

// Momenta from the general invariant formulas, with the scalar coefficients
// prolonged along the jet by the chain rule.
template <std::size_t N, InvariantLagrangian L>
Momenta<N> momenta_general(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, const L& lag) {
  const auto s = detail::invariant_series<1>(geo, jet);
  const auto p = lagrangian_partials(lag, s.gamma, s.beta, s.alpha);
  const double Lg = p[0].c[0], Lb = p[1].c[0], La = p[2].c[0];
  const double dLb = p[1].derivative(1), dLa = p[2].derivative(1);

  const Vec<N> u = geo.lower(jet.u), u1 = geo.lower(jet.u1), u2 = geo.lower(jet.u2);
  Momenta<N> m;
  m.pi1 = Lb * u + 2.0 * La * u1;
  m.pi1_prime = dLb * u + Lb * u1 + 2.0 * dLa * u1 + 2.0 * La * u2;
  m.pi = 2.0 * Lg * u + Lb * u1 - m.pi1_prime;
  return m;
}

// Closed-form momenta of the Kawaguchi Lagrangian.
template <std::size_t N>
Momenta<N> momenta_kawaguchi(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, double A) {
  const Invariants inv = invariants_at(geo, jet);
  const double n = std::sqrt(inv.gamma);
  const double n3 = n * n * n, n5 = n3 * n * n, n7 = n5 * n * n;
  const double beta = inv.beta, alpha = inv.alpha;
  const double delta = geo.inner(jet.u, jet.u2);

  const Vec<N> u = geo.lower(jet.u), u1 = geo.lower(jet.u1), u2 = geo.lower(jet.u2);
  Momenta<N> m;
  m.pi1 = (2.0 / n3) * u1 - (2.0 * beta / n5) * u;
  m.pi = (2.0 * delta / n5 - alpha / n5 - 5.0 * beta * beta / n7 + A / n) * u +
         (6.0 * beta / n5) * u1 - (2.0 / n3) * u2;
  m.pi1_prime = (2.0 / n3) * u2 - (8.0 * beta / n5) * u1 -
                (2.0 * (alpha + delta) / n5 - 10.0 * beta * beta / n7) * u;
  return m;
}

// Covariant Euler-Poisson expression. The jet must carry u'''.
template <std::size_t N, InvariantLagrangian L>
EulerPoissonValue<N> euler_poisson_covariant(const LocalGeometry<N>& geo, const CovariantJet<N>& jet,
                                             const L& lag) {
  const auto s = detail::invariant_series<2>(geo, jet);
  const auto p = lagrangian_partials(lag, s.gamma, s.beta, s.alpha);
  const double Lg = p[0].c[0], Lb = p[1].c[0], La = p[2].c[0];
  const double dLg = p[0].derivative(1), dLb = p[1].derivative(1), dLa = p[2].derivative(1);
  const double ddLb = p[1].derivative(2), ddLa = p[2].derivative(2);

  // pi = a u + b u' + c u''
  const double a = 2.0 * Lg - dLb, b = -2.0 * dLa, c = -2.0 * La;
  const double da = 2.0 * dLg - ddLb, db = -2.0 * ddLa, dc = -2.0 * dLa;
  const Vec<N> pi_prime =
      geo.lower(da * jet.u + (a + db) * jet.u1 + (b + dc) * jet.u2 + c * jet.third());
  const Vec<N> pi1 = geo.lower(Lb * jet.u + 2.0 * La * jet.u1);

  EulerPoissonValue<N> ev;
  ev.E = -pi_prime - kCouplingSign * curvature_coupling<N>(geo.curvature, pi1, jet.u);
  return ev;
}

template <std::size_t N, InvariantLagrangian L>
EulerPoissonValue<N> euler_poisson_covariant(const SpacetimeChart<N>& chart,
                                             const CovariantJet<N>& jet, const L& lag) {
  return euler_poisson_covariant(chart.at(jet.x), jet, lag);
}

// ---------------------------------------------------------------------------
// Coordinate <-> covariant jets.
//
// u'   = udot + Gamma(u,u)
// u''  = d(u')/dxi + Gamma(u', u),  u''' likewise,
// where d/dxi of Gamma along the curve needs Gamma-dot = dGamma.u and
// Gamma-ddot = d/dxi (dGamma(x(xi)).xdot(xi)); the latter is taken by a
// five-point stencil on the osculating parabola of the curve.

namespace detail {

template <std::size_t N>
Vec<N> contract(const Rank3<N>& G, const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r;
  for (std::size_t n = 0; n < N; ++n) r[n] = b.dot(G[n] * a);
  return r;
}

template <std::size_t N>
Rank3<N> directional(const Rank4<N>& dG, const Vec<N>& v) {
  Rank3<N> r = zero_rank3<N>();
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t l = 0; l < N; ++l) r[l] += v[k] * dG[k][l];
  return r;
}

template <std::size_t N>
struct ConnectionAlongCurve {
  Rank3<N> G0, G1, G2;  // Gamma and its first two parameter derivatives
};

template <std::size_t N>
ConnectionAlongCurve<N> connection_along(const SpacetimeChart<N>& chart, const Vec<N>& x,
                                         const Vec<N>& u, const Vec<N>& udot) {
  const Christoffel<N> c0 = chart.christoffel_at(x, true);
  ConnectionAlongCurve<N> out;
  out.G0 = c0.gamma;
  out.G1 = directional<N>(c0.dgamma, u);

  const double speed = std::max(1.0, u.cwiseAbs().maxCoeff());
  const double h = 1e-3 / speed;
  std::array<Rank3<N>, 4> samples;
  const std::array<double, 4> ts{-2.0 * h, -h, h, 2.0 * h};
  for (std::size_t i = 0; i < 4; ++i) {
    const double t = ts[i];
    const Vec<N> xt = x + t * u + 0.5 * t * t * udot;
    const Vec<N> vt = u + t * udot;
    samples[i] = directional<N>(chart.christoffel_at(xt, true).dgamma, vt);
  }
  out.G2 = zero_rank3<N>();
  for (std::size_t l = 0; l < N; ++l)
    out.G2[l] = numdiff::five_point_from_samples<Mat<N>>(samples[0][l], samples[1][l], samples[2][l],
                                                         samples[3][l], h);
  return out;
}


template <std::size_t N>
struct Chain {
  Vec<N> u1, u2, u3;
};

template <std::size_t N>
Chain<N> forward_chain(const ConnectionAlongCurve<N>& c, const Vec<N>& u, const Vec<N>& ud,
                       const Vec<N>& udd, const Vec<N>& uddd) {
  Chain<N> r;
  r.u1 = ud + contract<N>(c.G0, u, u);
  const Vec<N> v1 = udd + contract<N>(c.G1, u, u) + 2.0 * contract<N>(c.G0, ud, u);
  r.u2 = v1 + contract<N>(c.G0, r.u1, u);
  const Vec<N> v2 = uddd + contract<N>(c.G2, u, u) + 4.0 * contract<N>(c.G1, ud, u) +
                    2.0 * contract<N>(c.G0, udd, u) + 2.0 * contract<N>(c.G0, ud, ud);
  const Vec<N> du2 =
      v2 + contract<N>(c.G1, r.u1, u) + contract<N>(c.G0, v1, u) + contract<N>(c.G0, r.u1, ud);
  r.u3 = du2 + contract<N>(c.G0, r.u2, u);
  return r;
}

}  // namespace detail

template <std::size_t N>
CovariantJet<N> jet_coordinate_to_covariant(const SpacetimeChart<N>& chart, const CoordinateJet<N>& cj,
                                            double param = 0.0) {
  const auto conn = detail::connection_along(chart, cj.x, cj.u, cj.udot);
  const auto ch = detail::forward_chain<N>(conn, cj.u, cj.udot, cj.uddot, cj.udddot);
  CovariantJet<N> jet;
  jet.x = cj.x;
  jet.u = cj.u;
  jet.u1 = ch.u1;
  jet.u2 = ch.u2;
  jet.u3 = ch.u3;
  jet.param = param;
  return jet;
}

template <std::size_t N>
CoordinateJet<N> jet_covariant_to_coordinate(const SpacetimeChart<N>& chart, const CovariantJet<N>& jet) {
  CoordinateJet<N> cj;
  cj.x = jet.x;
  cj.u = jet.u;
  const Rank3<N> G0 = chart.christoffel_at(jet.x, false).gamma;
  cj.udot = jet.u1 - detail::contract<N>(G0, jet.u, jet.u);
  const auto conn = detail::connection_along(chart, jet.x, jet.u, cj.udot);
  const Vec<N> zero = Vec<N>::Zero();
  // Each higher ordinary derivative enters its covariant counterpart with unit
  // coefficient, so it is recovered by subtracting the rest of the chain.
  cj.uddot = jet.u2 - detail::forward_chain<N>(conn, jet.u, cj.udot, zero, zero).u2;
  cj.udddot = jet.third() - detail::forward_chain<N>(conn, jet.u, cj.udot, cj.uddot, zero).u3;
  return cj;
}

// ---------------------------------------------------------------------------
// The Lagrangian as a function of coordinate velocities, L(x, u, udot).

template <std::size_t N, InvariantLagrangian L>
class CoordinateLagrangian {
 public:
  CoordinateLagrangian(const SpacetimeChart<N>& chart, L lag) : chart_(&chart), lag_(std::move(lag)) {}

  double operator()(const Vec<N>& x, const Vec<N>& u, const Vec<N>& udot) const {
    const Christoffel<N> c = chart_->christoffel_at(x, false);
    const Mat<N> g = chart_->metric(x);
    const Vec<N> u1 = udot + detail::contract<N>(c.gamma, u, u);
    return covariant(g, u, u1);
  }

  // L expressed through covariant u' (the tilde-L of the coordinate change).
  double covariant(const Mat<N>& g, const Vec<N>& u, const Vec<N>& u1) const {
    const double gamma = u.dot(g * u);
    if (!(gamma > 0.0)) throw NonTimelike("gamma = <u,u> is not positive");
    return lag_(gamma, u.dot(g * u1), u1.dot(g * u1));
  }

  double tilde(const Vec<N>& x, const Vec<N>& u, const Vec<N>& u1) const {
    return covariant(chart_->metric(x), u, u1);
  }

  const SpacetimeChart<N>& chart() const { return *chart_; }
  const L& lagrangian() const { return lag_; }

 private:
  const SpacetimeChart<N>* chart_;
  L lag_;
};

// Gradient of f with respect to one vector slot, one Richardson level.
template <std::size_t N, class F>
Vec<N> numeric_gradient(F&& f, const Vec<N>& v, double base_step) {
  Vec<N> grad;
  for (std::size_t i = 0; i < N; ++i) {
    auto fi = [&](double t) {
      Vec<N> w = v;
      w[i] += t;
      return f(w);
    };
    grad[i] = numdiff::richardson(fi, 0.0, numdiff::scaled_step(base_step, v[i]));
  }
  return grad;
}

struct ZermeloResidual {
  double homogeneity = 0.0;  // u.dL/du + 2 udot.dL/dudot - L
  double transversal = 0.0;  // u.dL/dudot
};

// Second-order Zermelo identities with numeric partials of L(x, u, udot).
template <std::size_t N, class CoordL>
ZermeloResidual zermelo_check(const CoordL& Lc, const Vec<N>& x, const Vec<N>& u, const Vec<N>& udot,
                              double step = 1e-3) {
  const double value = Lc(x, u, udot);
  const Vec<N> dLdu = numeric_gradient<N>([&](const Vec<N>& w) { return Lc(x, w, udot); }, u, step);
  const Vec<N> dLdud = numeric_gradient<N>([&](const Vec<N>& w) { return Lc(x, u, w); }, udot, step);
  return {u.dot(dLdu) + 2.0 * udot.dot(dLdud) - value, u.dot(dLdud)};
}

}  // namespace wk
