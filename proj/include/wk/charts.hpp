#pragma once

// Built-in coordinate charts with closed-form metric derivatives.

#include <cmath>
#include <string>

#include "wk/errors.hpp"
#include "wk/geometry.hpp"

namespace wk::charts {

namespace detail {

// Built-ins are written for (+,-,-,-); the mirrored signature flips g.
inline double orientation(const Signature<4>& sig) {
  if (sig == default_signature<4>()) return 1.0;
  Signature<4> mirrored = default_signature<4>();
  for (auto& s : mirrored) s = -s;
  if (sig == mirrored) return -1.0;
  throw ConfigError("built-in chart supports signature (+,-,-,-) or (-,+,+,+) only");
}

inline void check_signature_entries(const auto& sig) {
  for (int s : sig)
    if (s != 1 && s != -1) throw ConfigError("signature entries must be +1 or -1");
}

}  // namespace detail

template <std::size_t N = 4>
SpacetimeChart<N> minkowski(Signature<N> signature = default_signature<N>()) {
  detail::check_signature_entries(signature);
  auto jet = [signature](const Vec<N>&) {
    MetricJet<N> j;
    for (std::size_t i = 0; i < N; ++i) j.g(i, i) = signature[i];
    return j;
  };
  return SpacetimeChart<N>::analytic("minkowski", jet, signature);
}

// Exterior Schwarzschild in (t, r, theta, phi).
inline SpacetimeChart<4> schwarzschild(double mass, Signature<4> signature = default_signature<4>()) {
  if (!(mass > 0.0)) throw ConfigError("schwarzschild: M must be positive");
  const double s = detail::orientation(signature);
  auto domain = [mass](const Vec<4>& x) {
    if (!(x[1] > 2.0 * mass * (1.0 + 1e-6)))
      throw OutOfChart("schwarzschild: r = " + std::to_string(x[1]) + " is not outside the horizon");
    if (!(std::abs(std::sin(x[2])) > 1e-8)) throw OutOfChart("schwarzschild: on the polar axis");
  };
  auto jet = [mass, s](const Vec<4>& x) {
    const double r = x[1], th = x[2];
    const double sn = std::sin(th), cs = std::cos(th);
    const double f = 1.0 - 2.0 * mass / r;
    const double fp = 2.0 * mass / (r * r);
    const double fpp = -4.0 * mass / (r * r * r);
    MetricJet<4> j;
    j.g(0, 0) = f;
    j.g(1, 1) = -1.0 / f;
    j.g(2, 2) = -r * r;
    j.g(3, 3) = -r * r * sn * sn;

    auto& dr = j.dg[1];
    dr(0, 0) = fp;
    dr(1, 1) = fp / (f * f);
    dr(2, 2) = -2.0 * r;
    dr(3, 3) = -2.0 * r * sn * sn;
    j.dg[2](3, 3) = -2.0 * r * r * sn * cs;

    auto& drr = j.ddg[1][1];
    drr(0, 0) = fpp;
    drr(1, 1) = fpp / (f * f) - 2.0 * fp * fp / (f * f * f);
    drr(2, 2) = -2.0;
    drr(3, 3) = -2.0 * sn * sn;
    j.ddg[1][2](3, 3) = -4.0 * r * sn * cs;
    j.ddg[2][1](3, 3) = -4.0 * r * sn * cs;
    j.ddg[2][2](3, 3) = -2.0 * r * r * (cs * cs - sn * sn);

    if (s < 0) {
      j.g = -j.g;
      for (auto& m : j.dg) m = -m;
      for (auto& row : j.ddg)
        for (auto& m : row) m = -m;
    }
    return j;
  };
  return SpacetimeChart<4>::analytic("schwarzschild", jet, signature, domain);
}

// de Sitter in spatially flat slicing (t, x, y, z): g = diag(1, -e^{2Ht} I).
inline SpacetimeChart<4> de_sitter(double hubble, Signature<4> signature = default_signature<4>()) {
  if (!(hubble > 0.0)) throw ConfigError("desitter: H must be positive");
  const double s = detail::orientation(signature);
  auto domain = [hubble](const Vec<4>& x) {
    if (!(std::abs(hubble * x[0]) < 300.0)) throw OutOfChart("desitter: scale factor overflow");
  };
  auto jet = [hubble, s](const Vec<4>& x) {
    const double a2 = std::exp(2.0 * hubble * x[0]);
    MetricJet<4> j;
    j.g(0, 0) = s;
    for (int i = 1; i < 4; ++i) {
      j.g(i, i) = -s * a2;
      j.dg[0](i, i) = -s * 2.0 * hubble * a2;
      j.ddg[0][0](i, i) = -s * 4.0 * hubble * hubble * a2;
    }
    return j;
  };
  return SpacetimeChart<4>::analytic("desitter", jet, signature, domain);
}

// Coordinate 4-velocity of the circular geodesic at radius r in the
// equatorial plane, normalized in (+,-,-,-). Needs r > 3M.
inline Vec<4> schwarzschild_circular_velocity(double mass, double r) {
  if (!(r > 3.0 * mass)) throw ConfigError("circular orbits need r > 3M");
  const double ut = 1.0 / std::sqrt(1.0 - 3.0 * mass / r);
  return Vec<4>(ut, 0.0, 0.0, ut * std::sqrt(mass / (r * r * r)));
}

}  // namespace wk::charts
