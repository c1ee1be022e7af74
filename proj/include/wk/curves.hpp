#pragma once

// Coordinate curves xi -> x(xi) with ordinary derivatives through 4th order.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "wk/errors.hpp"
#include "wk/tensor.hpp"
#include "wk/variational.hpp"

namespace wk {

template <std::size_t N>
class CoordinateCurve {
 public:
  // d[i] = i-th derivative of x at xi, i = 0..4
  using Derivatives = std::array<Vec<N>, 5>;
  using Fn = std::function<Derivatives(double)>;

  CoordinateCurve(Fn fn, double xi0, double xi1) : fn_(std::move(fn)), xi0_(xi0), xi1_(xi1) {
    if (!(xi1 > xi0)) throw Error("curve window must have positive length");
  }

  Derivatives derivatives(double xi) const { return fn_(xi); }
  Vec<N> position(double xi) const { return fn_(xi)[0]; }

  CoordinateJet<N> jet(double xi) const {
    const auto d = fn_(xi);
    return {d[0], d[1], d[2], d[3], d[4]};
  }

  double begin() const { return xi0_; }
  double end() const { return xi1_; }

  // this + eps * other on the same window
  CoordinateCurve plus(const CoordinateCurve& other, double eps) const {
    Fn a = fn_, b = other.fn_;
    return CoordinateCurve(
        [a, b, eps](double xi) {
          Derivatives da = a(xi);
          const Derivatives db = b(xi);
          for (std::size_t i = 0; i < 5; ++i) da[i] += eps * db[i];
          return da;
        },
        xi0_, xi1_);
  }

 private:
  Fn fn_;
  double xi0_, xi1_;
};

// x(xi) = sum_k c_k xi^k
template <std::size_t N>
CoordinateCurve<N> polynomial_curve(std::vector<Vec<N>> coeffs, double xi0, double xi1) {
  return CoordinateCurve<N>(
      [c = std::move(coeffs)](double xi) {
        typename CoordinateCurve<N>::Derivatives d;
        for (auto& v : d) v.setZero();
        for (std::size_t k = 0; k < c.size(); ++k) {
          for (std::size_t order = 0; order <= 4 && order <= k; ++order) {
            double falling = 1.0;
            for (std::size_t j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
            d[order] += falling * std::pow(xi, static_cast<double>(k - order)) * c[k];
          }
        }
        return d;
      },
      xi0, xi1);
}

// Compactly supported perturbation direction * sin^4(pi (xi - a) / (b - a)) on
// [a, b], zero outside. Vanishes with three derivatives at both ends.
template <std::size_t N>
CoordinateCurve<N> sin4_bump(const Vec<N>& direction, double a, double b) {
  return CoordinateCurve<N>(
      [direction, a, b](double xi) {
        typename CoordinateCurve<N>::Derivatives d;
        for (auto& v : d) v.setZero();
        if (xi <= a || xi >= b) return d;
        const double k = std::numbers::pi / (b - a);
        const double th = k * (xi - a);
        const double s = std::sin(th), c = std::cos(th);
        const double s2 = s * s, c2 = c * c;
        const std::array<double, 5> w{
            s2 * s2,
            k * 4.0 * s2 * s * c,
            k * k * (12.0 * s2 * c2 - 4.0 * s2 * s2),
            k * k * k * (24.0 * s * c2 * c - 40.0 * s2 * s * c),
            k * k * k * k * (24.0 * c2 * c2 - 192.0 * s2 * c2 + 40.0 * s2 * s2)};
        for (std::size_t i = 0; i < 5; ++i) d[i] = w[i] * direction;
        return d;
      },
      a, b);
}

// y(eta) = x(phi(eta)) with phi' > 0; phi returns phi and its first four
// derivatives. Window mapped through phi^-1 is left to the caller: the new
// curve keeps [eta0, eta1].
template <std::size_t N>
CoordinateCurve<N> reparametrized(const CoordinateCurve<N>& curve, std::function<std::array<double, 5>(double)> phi,
                                  double eta0, double eta1) {
  return CoordinateCurve<N>(
      [curve, phi](double eta) {
        const auto p = phi(eta);
        if (!(p[1] > 0.0)) throw Error("reparametrization must be orientation preserving");
        const auto x = curve.derivatives(p[0]);
        typename CoordinateCurve<N>::Derivatives y;
        y[0] = x[0];
        y[1] = p[1] * x[1];
        y[2] = p[1] * p[1] * x[2] + p[2] * x[1];
        y[3] = p[1] * p[1] * p[1] * x[3] + 3.0 * p[1] * p[2] * x[2] + p[3] * x[1];
        y[4] = std::pow(p[1], 4) * x[4] + 6.0 * p[1] * p[1] * p[2] * x[3] +
               (3.0 * p[2] * p[2] + 4.0 * p[1] * p[3]) * x[2] + p[4] * x[1];
        return y;
      },
      eta0, eta1);
}

}  // namespace wk
