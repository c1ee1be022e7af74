#pragma once

// Pseudo-Riemannian metric kernel.
//
// Index conventions (all arrays are plain component storage):
//   MetricJet::dg[k](m, n)            = d g_mn / d x^k
//   MetricJet::ddg[j][k](m, n)        = d^2 g_mn / d x^j d x^k
//   Christoffel::gamma[l](m, n)       = Gamma^l_mn
//   Christoffel::dgamma[k][l](m, n)   = d Gamma^l_mn / d x^k
//   Curvature::riemann[k][m](n, l)    = R_kmn^l
//
// with R_kmn^l = d_m Gamma^l_kn - d_k Gamma^l_mn + Gamma^l_mq Gamma^q_kn
//              - Gamma^l_kq Gamma^q_mn.
// This is R^l_nmk in the Misner-Thorne-Wheeler ordering; note that it has the
// opposite overall sign to the convention used by Dixon.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "wk/errors.hpp"
#include "wk/numdiff.hpp"
#include "wk/tensor.hpp"

namespace wk {

template <std::size_t N>
using Signature = std::array<int, N>;

template <std::size_t N>
Signature<N> default_signature() {
  Signature<N> s;
  s.fill(-1);
  s[0] = 1;
  return s;
}

inline constexpr double kDegeneracyThreshold = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

template <std::size_t N>
struct MetricJet {
  Mat<N> g = Mat<N>::Zero();
  Rank3<N> dg = zero_rank3<N>();
  Rank4<N> ddg = zero_rank4<N>();
};

template <std::size_t N>
struct Christoffel {
  Mat<N> g_inv = Mat<N>::Zero();
  Rank3<N> gamma = zero_rank3<N>();
  Rank4<N> dgamma = zero_rank4<N>();
  bool has_derivatives = false;
};

template <std::size_t N>
struct Curvature {
  Rank4<N> riemann = zero_rank4<N>();

  double operator()(std::size_t k, std::size_t m, std::size_t n, std::size_t l) const {
    return riemann[k][m](n, l);
  }
};

namespace detail {

template <std::size_t N>
Mat<N> checked_inverse(const Mat<N>& g) {
  const double det = g.determinant();
  if (!(std::abs(det) > kDegeneracyThreshold)) {
    throw DegenerateMetric("metric determinant " + std::to_string(det) + " below threshold");
  }
  return g.inverse();
}

}  // namespace detail

// Levi-Civita connection of the jet, together with its first derivatives.
template <std::size_t N>
Christoffel<N> christoffel(const MetricJet<N>& jet, bool with_derivatives = true) {
  Christoffel<N> c;
  c.g_inv = detail::checked_inverse<N>(jet.g);
  const auto& gi = c.g_inv;

  // first kind: lowered[q](k, n) = 1/2 (d_k g_qn + d_n g_qk - d_q g_kn)
  Rank3<N> lowered = zero_rank3<N>();
  for (std::size_t q = 0; q < N; ++q)
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t n = k; n < N; ++n) {
        const double v = 0.5 * (jet.dg[k](q, n) + jet.dg[n](q, k) - jet.dg[q](k, n));
        lowered[q](k, n) = v;
        lowered[q](n, k) = v;
      }
  for (std::size_t l = 0; l < N; ++l)
    for (std::size_t q = 0; q < N; ++q) c.gamma[l] += gi(l, q) * lowered[q];

  if (!with_derivatives) return c;
  c.has_derivatives = true;

  for (std::size_t j = 0; j < N; ++j) {
    // d_j (first kind)
    Rank3<N> dlowered = zero_rank3<N>();
    for (std::size_t q = 0; q < N; ++q)
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t n = k; n < N; ++n) {
          const double v =
              0.5 * (jet.ddg[j][k](q, n) + jet.ddg[j][n](q, k) - jet.ddg[j][q](k, n));
          dlowered[q](k, n) = v;
          dlowered[q](n, k) = v;
        }
    // d_j g^{lq} = -g^{la} d_j g_ab g^{bq}
    const Mat<N> dginv = -gi * jet.dg[j] * gi;
    for (std::size_t l = 0; l < N; ++l) {
      Mat<N> acc = Mat<N>::Zero();
      for (std::size_t q = 0; q < N; ++q) acc += dginv(l, q) * lowered[q] + gi(l, q) * dlowered[q];
      c.dgamma[j][l] = acc;
    }
  }
  return c;
}

template <std::size_t N>
Curvature<N> riemann(const Christoffel<N>& c) {
  if (!c.has_derivatives) throw Error("riemann: Christoffel symbols lack derivatives");
  Curvature<N> r;
  const auto& G = c.gamma;
  const auto& dG = c.dgamma;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t l = 0; l < N; ++l) {
          double v = dG[m][l](k, n) - dG[k][l](m, n);
          for (std::size_t q = 0; q < N; ++q) v += G[l](m, q) * G[q](k, n) - G[l](k, q) * G[q](m, n);
          r.riemann[k][m](n, l) = v;
        }
  return r;
}

// Everything known about the geometry at one point.
template <std::size_t N>
struct LocalGeometry {
  Vec<N> x;
  MetricJet<N> jet;
  Christoffel<N> chris;
  Curvature<N> curvature;

  const Mat<N>& g() const { return jet.g; }
  const Mat<N>& g_inv() const { return chris.g_inv; }
  const Rank3<N>& gamma() const { return chris.gamma; }

  double inner(const Vec<N>& a, const Vec<N>& b) const { return a.dot(jet.g * b); }
  Vec<N> lower(const Vec<N>& a) const { return jet.g * a; }
  Vec<N> raise(const Vec<N>& w) const { return chris.g_inv * w; }

  // Gamma^n_lm a^m b^l
  Vec<N> contract(const Vec<N>& a, const Vec<N>& b) const {
    Vec<N> r;
    for (std::size_t n = 0; n < N; ++n) r[n] = b.dot(chris.gamma[n] * a);
    return r;
  }
};

template <std::size_t N>
class SpacetimeChart {
 public:
  enum class DerivativeMode { Analytic, Numeric };

  using MetricFn = std::function<Mat<N>(const Vec<N>&)>;
  using JetFn = std::function<MetricJet<N>(const Vec<N>&)>;
  // Throws OutOfChart when the point lies outside the coordinate patch.
  using DomainFn = std::function<void(const Vec<N>&)>;

  // User-supplied pointwise metric; derivatives by central differences with
  // one Richardson level.
  static SpacetimeChart from_function(std::string name, MetricFn metric,
                                      Signature<N> signature = default_signature<N>(),
                                      double step = 1e-4, DomainFn domain = {}) {
    SpacetimeChart c;
    c.name_ = std::move(name);
    c.metric_ = std::move(metric);
    c.signature_ = signature;
    c.domain_ = std::move(domain);
    c.mode_ = DerivativeMode::Numeric;
    c.step_ = step;
    return c;
  }

  // Built-in chart with closed-form derivatives.
  static SpacetimeChart analytic(std::string name, JetFn jet, Signature<N> signature,
                                 DomainFn domain = {}) {
    SpacetimeChart c;
    c.name_ = std::move(name);
    c.analytic_jet_ = jet;
    c.metric_ = [jet](const Vec<N>& x) { return jet(x).g; };
    c.signature_ = signature;
    c.domain_ = std::move(domain);
    c.mode_ = DerivativeMode::Analytic;
    return c;
  }

  SpacetimeChart with_numeric_derivatives(double step = 1e-4) const {
    SpacetimeChart c = *this;
    c.mode_ = DerivativeMode::Numeric;
    c.step_ = step;
    return c;
  }

  const std::string& name() const { return name_; }
  const Signature<N>& signature() const { return signature_; }
  DerivativeMode mode() const { return mode_; }
  double step() const { return step_; }

  void check_domain(const Vec<N>& x) const {
    for (std::size_t i = 0; i < N; ++i)
      if (!std::isfinite(x[i])) throw OutOfChart("non-finite coordinate");
    if (domain_) domain_(x);
  }

  Mat<N> metric(const Vec<N>& x) const {
    check_domain(x);
    Mat<N> g = metric_(x);
    check_metric(g);
    return g;
  }

  MetricJet<N> metric_jet(const Vec<N>& x, bool second_derivatives = true) const {
    check_domain(x);
    if (mode_ == DerivativeMode::Analytic) {
      MetricJet<N> j = analytic_jet_(x);
      check_metric(j.g);
      return j;
    }
    MetricJet<N> j;
    j.g = metric_(x);
    check_metric(j.g);
    for (std::size_t k = 0; k < N; ++k) j.dg[k] = numeric_dg(x, k);
    if (!second_derivatives) return j;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = a; b < N; ++b) {
        // d_a (d_b g), symmetrized over the derivative pair
        const double h = numdiff::scaled_step(step_, x[a]);
        auto dbg = [&](double t) {
          Vec<N> y = x;
          y[a] += t;
          return numeric_dg(y, b);
        };
        Mat<N> v = numdiff::richardson(dbg, 0.0, h);
        if (a != b) {
          const double h2 = numdiff::scaled_step(step_, x[b]);
          auto dag = [&](double t) {
            Vec<N> y = x;
            y[b] += t;
            return numeric_dg(y, a);
          };
          v = 0.5 * (v + numdiff::richardson(dag, 0.0, h2));
        }
        v = 0.5 * (v + v.transpose()).eval();
        j.ddg[a][b] = v;
        j.ddg[b][a] = v;
      }
    return j;
  }

  Christoffel<N> christoffel_at(const Vec<N>& x, bool with_derivatives = true) const {
    return christoffel(metric_jet(x, with_derivatives), with_derivatives);
  }

  LocalGeometry<N> at(const Vec<N>& x) const {
    LocalGeometry<N> geo;
    geo.x = x;
    geo.jet = metric_jet(x, true);
    geo.chris = christoffel(geo.jet, true);
    geo.curvature = riemann(geo.chris);
    return geo;
  }

  // Compares the inertia of g(x) with the declared signature.
  bool signature_matches(const Vec<N>& x) const {
    const Mat<N> g = metric(x);
    Eigen::SelfAdjointEigenSolver<Mat<N>> es(g, Eigen::EigenvaluesOnly);
    std::size_t pos = 0, want = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (es.eigenvalues()[i] > 0) ++pos;
      if (signature_[i] > 0) ++want;
    }
    return pos == want;
  }

 private:
  SpacetimeChart() = default;

  static void check_metric(const Mat<N>& g) {
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
      throw DegenerateMetric("metric is not symmetric");
    if (!(std::abs(g.determinant()) > kDegeneracyThreshold))
      throw DegenerateMetric("metric determinant below threshold");
  }

  Mat<N> numeric_dg(const Vec<N>& x, std::size_t k) const {
    const double h = numdiff::scaled_step(step_, x[k]);
    auto gk = [&](double t) {
      Vec<N> y = x;
      y[k] += t;
      return metric_(y);
    };
    Mat<N> d = numdiff::richardson(gk, 0.0, h);
    return 0.5 * (d + d.transpose());
  }

  std::string name_;
  MetricFn metric_;
  JetFn analytic_jet_;
  DomainFn domain_;
  Signature<N> signature_{};
  DerivativeMode mode_ = DerivativeMode::Analytic;
  double step_ = 1e-4;
};

// Free-function forms of the index operations.
template <std::size_t N>
double inner(const SpacetimeChart<N>& chart, const Vec<N>& x, const Vec<N>& a, const Vec<N>& b) {
  return a.dot(chart.metric(x) * b);
}

template <std::size_t N>
Vec<N> lower(const SpacetimeChart<N>& chart, const Vec<N>& x, const Vec<N>& a) {
  return chart.metric(x) * a;
}

template <std::size_t N>
Vec<N> raise(const SpacetimeChart<N>& chart, const Vec<N>& x, const Vec<N>& w) {
  return detail::checked_inverse<N>(chart.metric(x)) * w;
}

// a'^n = da^n/dxi + Gamma^n_lm a^m u^l
template <std::size_t N>
Vec<N> covariant_derivative(const Rank3<N>& gamma, const Vec<N>& u, const Vec<N>& a,
                            const Vec<N>& da_dxi) {
  Vec<N> r = da_dxi;
  for (std::size_t n = 0; n < N; ++n) r[n] += u.dot(gamma[n] * a);
  return r;
}

// a'_n = da_n/dxi - Gamma^m_ln a_m u^l
template <std::size_t N>
Vec<N> covariant_derivative_covector(const Rank3<N>& gamma, const Vec<N>& u, const Vec<N>& a,
                                     const Vec<N>& da_dxi) {
  Vec<N> r = da_dxi;
  for (std::size_t m = 0; m < N; ++m) r -= a[m] * (gamma[m] * u);
  return r;
}

template <std::size_t N>
Vec<N> covariant_derivative(const SpacetimeChart<N>& chart, const Vec<N>& x, const Vec<N>& u,
                            const Vec<N>& a, const Vec<N>& da_dxi) {
  return covariant_derivative<N>(chart.christoffel_at(x, false).gamma, u, a, da_dxi);
}

template <std::size_t N>
Vec<N> covariant_derivative_covector(const SpacetimeChart<N>& chart, const Vec<N>& x,
                                     const Vec<N>& u, const Vec<N>& a, const Vec<N>& da_dxi) {
  return covariant_derivative_covector<N>(chart.christoffel_at(x, false).gamma, u, a, da_dxi);
}

// Residual of the metric-compatibility identity
//   d_k g_mn = g_ml Gamma^l_kn + g_nl Gamma^l_km,
// relative to max(1, |dg|).
template <std::size_t N>
double compatibility_residual(const MetricJet<N>& jet, const Christoffel<N>& c) {
  double worst = 0.0;
  const double scale = std::max(1.0, max_abs<N>(jet.dg));
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t n = 0; n < N; ++n) {
        double rhs = 0.0;
        for (std::size_t l = 0; l < N; ++l)
          rhs += jet.g(m, l) * c.gamma[l](k, n) + jet.g(n, l) * c.gamma[l](k, m);
        worst = std::max(worst, std::abs(jet.dg[k](m, n) - rhs));
      }
  return worst / scale;
}

// max |R_kmn^l + R_mkn^l|
template <std::size_t N>
double first_pair_antisymmetry(const Curvature<N>& r) {
  double worst = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t m = 0; m < N; ++m)
      worst = std::max(worst, (r.riemann[k][m] + r.riemann[m][k]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace wk
