#pragma once

// Spinning-particle reading of the momenta: P = pi, S = u ^ pi1, and the two
// first-order relations
//
//   P'_n  = -1/2 R_nm^kl u^m S_kl,
//   S'_nm = P_n u_m - P_m u_n.
//
// Curvature index placement follows geometry.hpp (R_nm^kl = g^kj R_nmj^l).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wk/curves.hpp"
#include "wk/geometry.hpp"
#include "wk/numdiff.hpp"
#include "wk/variational.hpp"

namespace wk {

template <std::size_t N>
struct DixonState {
  Vec<N> P = Vec<N>::Zero();
  Mat<N> S = Mat<N>::Zero();  // S_nm = u_n pi1_m - u_m pi1_n
};

template <std::size_t N>
DixonState<N> dixon_from_momenta(const LocalGeometry<N>& geo, const Vec<N>& u, const Momenta<N>& m) {
  const Vec<N> ul = geo.lower(u);
  DixonState<N> d;
  d.P = m.pi;
  d.S = ul * m.pi1.transpose() - m.pi1 * ul.transpose();
  return d;
}

template <std::size_t N, InvariantLagrangian L>
DixonState<N> dixon_state(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, const L& lag) {
  return dixon_from_momenta<N>(geo, jet.u, momenta_general(geo, jet, lag));
}

// 1/2 R_nm^kl u^m S_kl
template <std::size_t N>
Vec<N> spin_curvature_force(const LocalGeometry<N>& geo, const Vec<N>& u, const Mat<N>& S) {
  const Mat<N> S_mixed = geo.g_inv() * S;  // S^j_l
  Vec<N> f = Vec<N>::Zero();
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t m = 0; m < N; ++m) f[n] += u[m] * geo.curvature.riemann[n][m].cwiseProduct(S_mixed).sum();
  return 0.5 * f;
}

// S'_nm = dS_nm/dxi - Gamma^k_ln u^l S_km - Gamma^k_lm u^l S_nk
template <std::size_t N>
Mat<N> covariant_derivative_2form(const Rank3<N>& gamma, const Vec<N>& u, const Mat<N>& S, const Mat<N>& dS) {
  Mat<N> C = Mat<N>::Zero();  // C(k, n) = Gamma^k_ln u^l
  for (std::size_t k = 0; k < N; ++k) C.row(k) = (gamma[k] * u).transpose();
  return dS - C.transpose() * S - S * C;
}

struct DixonResidualSummary {
  std::size_t cases = 0;
  double max_residual = 0.0;
};

// Second relation on an arbitrary coordinate curve: S' from five-point
// stencils of S along the curve at h and h/2 with one Richardson level,
// against P ^ u from the momenta at xi. Relative to max(1, |P ^ u|).
template <std::size_t N, InvariantLagrangian L>
double dixon_second_residual(const SpacetimeChart<N>& chart, const CoordinateCurve<N>& curve, double xi,
                             const L& lag, double h = 1e-3) {
  auto S_at = [&](double t) {
    const auto jet = jet_coordinate_to_covariant(chart, curve.jet(t), t);
    return dixon_state(chart.at(jet.x), jet, lag).S;
  };
  const Mat<N> dS = (16.0 * numdiff::five_point(S_at, xi, 0.5 * h) - numdiff::five_point(S_at, xi, h)) / 15.0;
  const auto jet = jet_coordinate_to_covariant(chart, curve.jet(xi), xi);
  const auto geo = chart.at(jet.x);
  const auto d = dixon_state(geo, jet, lag);
  const Mat<N> Sp = covariant_derivative_2form<N>(geo.gamma(), jet.u, d.S, dS);
  const Vec<N> ul = geo.lower(jet.u);
  const Mat<N> Pu = d.P * ul.transpose() - ul * d.P.transpose();
  return (Sp - Pu).cwiseAbs().maxCoeff() / std::max(1.0, Pu.cwiseAbs().maxCoeff());
}

}  // namespace wk
