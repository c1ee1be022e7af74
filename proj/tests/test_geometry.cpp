#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"
#include "wk/charts.hpp"
#include "wk/geometry.hpp"

using namespace wk;
using test::Builtin;

namespace {

// Independent oracle: Levi-Civita symbols from central differences of a
// pointwise metric, without going through the library's jet machinery.
Rank3<4> brute_force_christoffel(const std::function<Mat<4>(const Vec<4>&)>& metric, const Vec<4>& x) {
  const double h = 1e-5;
  Rank3<4> dg;
  for (int k = 0; k < 4; ++k) {
    Vec<4> xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dg[k] = (metric(xp) - metric(xm)) / (2 * h);
  }
  const Mat<4> gi = metric(x).inverse();
  Rank3<4> G = zero_rank3<4>();
  for (int l = 0; l < 4; ++l)
    for (int k = 0; k < 4; ++k)
      for (int n = 0; n < 4; ++n)
        for (int q = 0; q < 4; ++q)
          G[l](k, n) += 0.5 * gi(l, q) * (dg[k](q, n) + dg[n](q, k) - dg[q](k, n));
  return G;
}

Mat<4> schwarzschild_metric(const Vec<4>& x) {
  const double f = 1.0 - 2.0 / x[1];
  const double s = std::sin(x[2]);
  Mat<4> g = Mat<4>::Zero();
  g(0, 0) = f;
  g(1, 1) = -1.0 / f;
  g(2, 2) = -x[1] * x[1];
  g(3, 3) = -x[1] * x[1] * s * s;
  return g;
}

TEST(MetricJet, MinkowskiIsConstant) {
  const auto chart = charts::minkowski<4>();
  const auto jet = chart.metric_jet(Vec<4>(0.3, -1.0, 2.0, 5.0));
  EXPECT_EQ(jet.g, Mat<4>(Vec<4>(1, -1, -1, -1).asDiagonal()));
  EXPECT_EQ(max_abs<4>(jet.dg), 0.0);
  EXPECT_EQ(max_abs<4>(jet.ddg), 0.0);
}

TEST(MetricJet, SchwarzschildTimeComponent) {
  const auto chart = charts::schwarzschild(1.0);
  const auto jet = chart.metric_jet(Vec<4>(0.0, 10.0, std::numbers::pi / 2, 0.0));
  EXPECT_NEAR(jet.g(0, 0), 0.8, 1e-15);
  // cross-check the closed form against numeric differentiation
  const auto numeric = chart.with_numeric_derivatives().metric_jet(Vec<4>(0.0, 10.0, 1.0, 0.0));
  const auto analytic = chart.metric_jet(Vec<4>(0.0, 10.0, 1.0, 0.0));
  for (int k = 0; k < 4; ++k) EXPECT_LT((numeric.dg[k] - analytic.dg[k]).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(MetricJet, InsideHorizonIsOutOfChart) {
  const auto chart = charts::schwarzschild(1.0);
  EXPECT_THROW(chart.metric_jet(Vec<4>(0.0, 1.5, 1.0, 0.0)), OutOfChart);
  EXPECT_THROW(chart.metric_jet(Vec<4>(0.0, 5.0, 0.0, 0.0)), OutOfChart);
}

TEST(MetricJet, DegenerateUserMetricRejected) {
  auto chart = SpacetimeChart<2>::from_function(
      "degenerate", [](const Vec<2>& x) { return Mat<2>(Vec<2>(1.0, x[1]).asDiagonal()); },
      default_signature<2>());
  EXPECT_THROW(chart.metric_jet(Vec<2>(0.0, 0.0)), DegenerateMetric);
  EXPECT_NO_THROW(chart.metric_jet(Vec<2>(0.0, -1.0)));
}

TEST(MetricJet, NumericModeMatchesAnalyticOnBuiltins) {
  test::Rng rng(1);
  for (auto b : {Builtin::Schwarzschild, Builtin::DeSitter}) {
    const auto chart = test::make_chart(b);
    const auto numeric = chart.with_numeric_derivatives(1e-4);
    for (int i = 0; i < 20; ++i) {
      const Vec<4> x = test::interior_point(b, rng);
      const auto a = chart.metric_jet(x), n = numeric.metric_jet(x);
      const double scale = std::max(1e-300, max_abs<4>(a.dg));
      Rank3<4> diff;
      for (int k = 0; k < 4; ++k) diff[k] = a.dg[k] - n.dg[k];
      EXPECT_LE(max_abs<4>(diff) / scale, 1e-7) << test::name(b);
    }
  }
}

TEST(Christoffel, MinkowskiVanishes) {
  const auto c = charts::minkowski<4>().christoffel_at(Vec<4>::Zero());
  EXPECT_EQ(max_abs<4>(c.gamma), 0.0);
}

TEST(Christoffel, SchwarzschildRadialAcceleration) {
  const Vec<4> x(0.0, 10.0, std::numbers::pi / 2, 0.0);
  const auto oracle = brute_force_christoffel(schwarzschild_metric, x);
  EXPECT_NEAR(oracle[1](0, 0), 0.008, 1e-9);
  const auto c = charts::schwarzschild(1.0).christoffel_at(x);
  EXPECT_NEAR(c.gamma[1](0, 0), 0.008, 1e-15);
  for (int l = 0; l < 4; ++l) EXPECT_LT((c.gamma[l] - oracle[l]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Christoffel, CompatibilityIdentityOnBuiltins) {
  test::Rng rng(2);
  for (auto b : {Builtin::Minkowski, Builtin::Schwarzschild, Builtin::DeSitter}) {
    const auto chart = test::make_chart(b);
    const auto numeric = chart.with_numeric_derivatives();
    for (int i = 0; i < 100; ++i) {
      const Vec<4> x = test::interior_point(b, rng);
      const auto jet = chart.metric_jet(x);
      EXPECT_LE(compatibility_residual<4>(jet, christoffel(jet)), 1e-9) << test::name(b);
      const auto njet = numeric.metric_jet(x);
      EXPECT_LE(compatibility_residual<4>(njet, christoffel(njet)), 1e-5) << test::name(b);
    }
  }
}

TEST(Christoffel, LowerIndexSymmetry) {
  test::Rng rng(3);
  const auto chart = charts::schwarzschild(1.0);
  const auto c = chart.christoffel_at(test::interior_point(Builtin::Schwarzschild, rng));
  for (int l = 0; l < 4; ++l) EXPECT_EQ(c.gamma[l], c.gamma[l].transpose());
}

TEST(Riemann, FlatSpaceIsExactlyZero) {
  const auto geo = charts::minkowski<4>().at(Vec<4>(1, 2, 3, 4));
  EXPECT_EQ(max_abs<4>(geo.curvature.riemann), 0.0);
}

TEST(Riemann, FirstPairAntisymmetry) {
  test::Rng rng(4);
  for (auto b : {Builtin::Schwarzschild, Builtin::DeSitter}) {
    const auto chart = test::make_chart(b);
    for (int i = 0; i < 50; ++i) {
      const auto geo = chart.at(test::interior_point(b, rng));
      EXPECT_LE(first_pair_antisymmetry<4>(geo.curvature), 1e-10);
    }
  }
}

// Constant curvature: evaluating R_kmn^l = d_m G^l_kn - ... on de Sitter
// gives R_kmn^l = -H^2 (g_kn delta^l_m - g_mn delta^l_k) in (+,-,-,-).
TEST(Riemann, DeSitterConstantCurvature) {
  const double H = 0.1;
  const auto chart = charts::de_sitter(H);
  test::Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto geo = chart.at(test::interior_point(Builtin::DeSitter, rng));
    const Mat<4>& g = geo.g();
    double worst = 0.0;
    for (int k = 0; k < 4; ++k)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          for (int l = 0; l < 4; ++l) {
            const double expected = -H * H * (g(k, n) * (l == m) - g(m, n) * (l == k));
            worst = std::max(worst, std::abs(geo.curvature(k, m, n, l) - expected));
          }
    EXPECT_LE(worst, 1e-14);
  }
}

// Schwarzschild is Ricci-flat: R_kmn^m summed over m vanishes.
TEST(Riemann, SchwarzschildRicciFlat) {
  test::Rng rng(6);
  const auto chart = charts::schwarzschild(1.0);
  for (int i = 0; i < 20; ++i) {
    const auto geo = chart.at(test::interior_point(Builtin::Schwarzschild, rng));
    for (int k = 0; k < 4; ++k)
      for (int n = 0; n < 4; ++n) {
        double ric = 0.0;
        for (int m = 0; m < 4; ++m) ric += geo.curvature(k, m, n, m);
        EXPECT_NEAR(ric, 0.0, 1e-12);
      }
  }
}

TEST(IndexOps, SignatureAndInverse) {
  const auto mink = charts::minkowski<4>();
  EXPECT_EQ(inner<4>(mink, Vec<4>::Zero(), Vec<4>(1, 0, 0, 0), Vec<4>(1, 0, 0, 0)), 1.0);
  EXPECT_EQ(inner<4>(mink, Vec<4>::Zero(), Vec<4>(0, 1, 0, 0), Vec<4>(0, 1, 0, 0)), -1.0);

  test::Rng rng(7);
  const auto chart = charts::schwarzschild(1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec<4> x = test::interior_point(Builtin::Schwarzschild, rng);
    const Vec<4> a = rng.vec<4>(-1, 1), b = rng.vec<4>(-1, 1);
    const Vec<4> back = raise<4>(chart, x, lower<4>(chart, x, a));
    EXPECT_LE((back - a).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    const double ab = inner<4>(chart, x, a, b);
    EXPECT_NEAR(ab, inner<4>(chart, x, b, a), 1e-14 * std::max(1.0, std::abs(ab)));
  }
}

TEST(IndexOps, SignatureInertia) {
  test::Rng rng(8);
  for (auto b : {Builtin::Minkowski, Builtin::Schwarzschild, Builtin::DeSitter}) {
    const auto chart = test::make_chart(b);
    EXPECT_TRUE(chart.signature_matches(test::interior_point(b, rng)));
  }
  auto wrong = SpacetimeChart<2>::from_function(
      "euclidean", [](const Vec<2>&) { return Mat<2>::Identity().eval(); }, default_signature<2>());
  EXPECT_FALSE(wrong.signature_matches(Vec<2>::Zero()));
}

// Parallel-transport Leibniz rule along a curve: d/dxi <a,b> = <a',b> + <a,b'>.
TEST(CovariantDerivative, LeibnizAlongCurve) {
  const auto chart = charts::schwarzschild(1.0);
  test::Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec<4> x0 = test::interior_point(Builtin::Schwarzschild, rng);
    const Vec<4> v = rng.vec<4>(-0.2, 0.2), a0 = rng.vec<4>(-1, 1), a1 = rng.vec<4>(-1, 1);
    const Vec<4> b0 = rng.vec<4>(-1, 1), b1 = rng.vec<4>(-1, 1);
    auto x = [&](double t) { return Vec<4>(x0 + t * v); };
    auto a = [&](double t) { return Vec<4>(a0 + t * a1 + t * t * a0); };
    auto b = [&](double t) { return Vec<4>(b0 + t * b1); };
    auto ip = [&](double t) { return inner<4>(chart, x(t), a(t), b(t)); };
    const double lhs = numdiff::five_point(ip, 0.0, 1e-3);
    const Vec<4> ap = covariant_derivative<4>(chart, x(0), v, a(0), a1);
    const Vec<4> bp = covariant_derivative<4>(chart, x(0), v, b(0), b1);
    const double rhs = inner<4>(chart, x(0), ap, b(0)) + inner<4>(chart, x(0), a(0), bp);
    EXPECT_NEAR(lhs, rhs, 1e-8);

    // lowering commutes with the covariant derivative
    auto lowered_a = [&](double t) { return lower<4>(chart, x(t), a(t)); };
    const Vec<4> dlow = numdiff::five_point(lowered_a, 0.0, 1e-3);
    const Vec<4> low_prime = covariant_derivative_covector<4>(chart, x(0), v, lower<4>(chart, x(0), a(0)), dlow);
    EXPECT_LE((low_prime - lower<4>(chart, x(0), ap)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(CovariantDerivative, FlatAndConstantCases) {
  const Vec<4> u(1, 0.1, 0, 0), a(0.3, 0.2, 0.1, 0.0), da(1, 2, 3, 4);
  EXPECT_EQ(covariant_derivative<4>(charts::minkowski<4>(), Vec<4>::Zero(), u, a, da), da);
  const auto chart = charts::schwarzschild(1.0);
  const Vec<4> x(0, 7, 1.2, 0.3);
  const auto G = chart.christoffel_at(x, false).gamma;
  const Vec<4> r = covariant_derivative<4>(chart, x, u, a, Vec<4>::Zero());
  for (int n = 0; n < 4; ++n) {
    double expect = 0.0;
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m) expect += G[n](l, m) * a[m] * u[l];
    EXPECT_NEAR(r[n], expect, 1e-15);
  }
}

}  // namespace
