#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"
#include "wk/charts.hpp"
#include "wk/dixon.hpp"
#include "wk/dynamics.hpp"
#include "wk/oracles.hpp"

using namespace wk;
using test::Builtin;

namespace {

// Helix-like natural jet around the circular orbit at radius r0.
CovariantJet<4> spin_jet(const SpacetimeChart<4>& chart, double r0, double r, double omega) {
  const Vec<4> x(0.0, r0, std::numbers::pi / 2, 0.0);
  const auto geo = chart.at(x);
  return helix_jet_in_frame<4>(geo, charts::schwarzschild_circular_velocity(1.0, r0), Vec<4>(0, 1, 0, 0),
                               Vec<4>(0, 0, 0, 1), r, omega);
}

CovariantJet<4> random_natural_jet(Builtin b, test::Rng& rng) {
  const auto chart = test::make_chart(b);
  CovariantJet<4> j;
  j.x = test::interior_point(b, rng);
  const auto geo = chart.at(j.x);
  j.u = test::timelike_vector(chart, j.x, rng);
  j.u1 = rng.vec<4>(-0.5, 0.5);
  j.u2 = rng.vec<4>(-0.5, 0.5);
  if (b == Builtin::Schwarzschild)
    for (auto* v : {&j.u1, &j.u2}) v->tail<2>() *= 0.1;
  project_natural(geo, j);
  return j;
}

}  // namespace

TEST(Helix, SatisfiesRieweEquationIdentically) {
  for (double r : {0.0, 0.5, 1.3})
    for (double w : {0.5, 2.0}) {
      const auto h = riewe_helix(r, w);
      for (double s : {0.0, 0.7, 3.1}) {
        const Vec<4> res = h.derivative(4, s) + w * w * h.derivative(2, s);
        EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-12);
      }
      const auto geo = charts::minkowski<4>().at(Vec<4>::Zero());
      const auto j = h.jet(0.4);
      EXPECT_NEAR(geo.inner(j.u, j.u), 1.0, 1e-14);
      EXPECT_NEAR(geo.inner(j.u, j.u1), 0.0, 1e-14);
      EXPECT_NEAR(geo.inner(j.u1, j.u1), h.alpha(), 1e-12);
    }
}

TEST(Helix, DerivativesMatchFiniteDifferences) {
  const auto h = riewe_helix(0.5, 2.0);
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec<4> fd = numdiff::five_point([&](double s) { return h.derivative(k, s); }, 0.3, 1e-3);
    EXPECT_LE((fd - h.derivative(k + 1, 0.3)).cwiseAbs().maxCoeff(), 1e-9) << "order " << k;
  }
}

TEST(SolveU3, GeodesicDataGivesZero) {
  const auto geo = charts::minkowski<4>().at(Vec<4>::Zero());
  CovariantJet<4> j;
  j.u = Vec<4>(1, 0, 0, 0);
  EXPECT_EQ(solve_u3(geo, j, KawaguchiLagrangian{1.0}), Vec<4>::Zero());
}

TEST(SolveU3, HelixClosedFormOnConstraint) {
  const auto h = riewe_helix(0.5, 2.0);
  EXPECT_DOUBLE_EQ(h.alpha(), -4.0);
  EXPECT_DOUBLE_EQ(h.constraint_A(), -20.0);
  for (double s : {0.0, 1.0, 2.5}) {
    const auto j = h.jet(s);
    const Vec<4> u3 = solve_u3(charts::minkowski<4>().at(j.x), j, KawaguchiLagrangian{h.constraint_A()});
    EXPECT_LE((u3 - *j.u3).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SolveU3, ResidualScanSelectsConstraintValue) {
  const auto h = riewe_helix(0.5, 2.0);
  const auto chart = charts::minkowski<4>();
  const auto j = h.jet(0.3);
  double best_A = 0.0, best = 1e300;
  for (int i = 0; i <= 400; ++i) {
    const double A = -30.0 + 0.05 * i;
    const double e = euler_poisson_covariant(chart, j, KawaguchiLagrangian{A}).E.norm();
    if (e < best) best = e, best_A = A;
  }
  EXPECT_NEAR(best_A, -20.0, 1e-9);
  EXPECT_LE(best, 1e-8);
}

class SolveU3Charts : public ::testing::TestWithParam<Builtin> {};

TEST_P(SolveU3Charts, ClosedFormAnnihilatesEulerPoisson) {
  test::Rng rng(11);
  const KawaguchiLagrangian lag{-3.0};
  for (int i = 0; i < 50; ++i) {
    auto j = random_natural_jet(GetParam(), rng);
    const auto geo = test::make_chart(GetParam()).at(j.x);
    j.u3 = solve_u3(geo, j, lag);
    const double scale = std::max(1.0, j.u3->cwiseAbs().maxCoeff());
    EXPECT_LE(euler_poisson_covariant(geo, j, lag).E.cwiseAbs().maxCoeff(), 1e-8 * scale);
    const Vec<4> general = solve_u3_general(geo, j, lag);
    EXPECT_LE((general - *j.u3).cwiseAbs().maxCoeff(), 1e-9 * scale);
  }
}

TEST_P(SolveU3Charts, GeneralSolverForSecondLagrangian) {
  test::Rng rng(12);
  const QuarticCurvatureLagrangian lag{0.1};
  for (int i = 0; i < 50; ++i) {
    auto j = random_natural_jet(GetParam(), rng);
    const auto geo = test::make_chart(GetParam()).at(j.x);
    j.u3 = solve_u3_general(geo, j, lag);
    const auto E = euler_poisson_covariant(geo, j, lag).E;
    EXPECT_LE(E.cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, j.u3->cwiseAbs().maxCoeff()));
    EXPECT_NEAR(geo.inner(j.u, *j.u3), -3.0 * geo.inner(j.u1, j.u2), 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(Builtins, SolveU3Charts,
                         ::testing::Values(Builtin::Minkowski, Builtin::Schwarzschild, Builtin::DeSitter),
                         [](const auto& info) { return test::name(info.param); });

TEST(SolveU3, RejectsOffGaugeJets) {
  const auto geo = charts::minkowski<4>().at(Vec<4>::Zero());
  CovariantJet<4> j;
  j.u = Vec<4>(1.1, 0, 0, 0);
  EXPECT_THROW(solve_u3(geo, j, KawaguchiLagrangian{}), GaugeViolated);
  j.u = Vec<4>(0, 1, 0, 0);
  EXPECT_THROW(solve_u3(geo, j, KawaguchiLagrangian{}), NonTimelike);
}

TEST(Integrate, MinkowskiGeodesicStaysStraight) {
  const auto chart = charts::minkowski<4>();
  CovariantJet<4> j;
  const double b = std::sqrt(1.0 + 0.09 + 0.01);
  j.x = Vec<4>(0.0, 1.0, -2.0, 0.5);
  j.u = Vec<4>(b, 0.3, 0.0, -0.1);
  IntegratorConfig cfg;
  cfg.horizon = 10.0;
  const auto traj = integrate(chart, j, KawaguchiLagrangian{1.0}, cfg);
  ASSERT_TRUE(traj.completed()) << traj.message;
  // Position accumulates one rounding per step, so the bound scales with
  // the coordinate size along the path.
  double err = 0.0, eres = 0.0;
  for (const auto& smp : traj.samples) {
    const double scale = std::max(1.0, smp.jet.x.cwiseAbs().maxCoeff());
    err = std::max(err, (smp.jet.x - j.x - j.u * smp.s).cwiseAbs().maxCoeff() / scale);
    eres = std::max(eres, smp.diag.E_residual);
  }
  EXPECT_LE(err, 1e-12);
  EXPECT_LE(eres, 1e-12);
  EXPECT_EQ(traj.samples.size(), 10001u);
}

TEST(Integrate, RieweHelixRecovery) {
  const auto h = riewe_helix(0.5, 2.0);
  IntegratorConfig cfg;
  cfg.horizon = 10.0;
  const auto traj = integrate(charts::minkowski<4>(), h.jet(0.0), KawaguchiLagrangian{h.constraint_A()}, cfg);
  ASSERT_TRUE(traj.completed()) << traj.message;
  double err = 0.0, k2_drift = 0.0;
  for (const auto& smp : traj.samples) {
    err = std::max(err, (smp.jet.x - h.derivative(0, smp.s)).cwiseAbs().maxCoeff());
    k2_drift = std::max(k2_drift, std::abs(smp.diag.k2 - h.alpha()));
  }
  EXPECT_LE(err, 1e-6);
  EXPECT_LE(k2_drift, 1e-7);
}

TEST(Integrate, GaugeDriftWithoutProjection) {
  const auto h = riewe_helix(0.5, 2.0);
  IntegratorConfig cfg;
  cfg.gauge_projection = false;
  const auto traj = integrate(charts::minkowski<4>(), h.jet(0.0), KawaguchiLagrangian{h.constraint_A()}, cfg);
  ASSERT_TRUE(traj.completed());
  EXPECT_LE(traj.max_gamma_drift, 1e-4);
  EXPECT_LE(traj.max_beta_drift, 1e-4);
}

TEST(Integrate, Rk45MatchesHelix) {
  const auto h = riewe_helix(0.5, 2.0);
  IntegratorConfig cfg;
  cfg.method = StepMethod::Rk45;
  cfg.step = 0.05;
  const auto traj = integrate(charts::minkowski<4>(), h.jet(0.0), KawaguchiLagrangian{h.constraint_A()}, cfg);
  ASSERT_TRUE(traj.completed()) << traj.message;
  EXPECT_NEAR(traj.samples.back().s, 10.0, 1e-12);
  double err = 0.0;
  for (const auto& smp : traj.samples) err = std::max(err, (smp.jet.x - h.derivative(0, smp.s)).cwiseAbs().maxCoeff());
  EXPECT_LE(err, 1e-5);
}

TEST(Integrate, OffGaugeInitialDataRejected) {
  CovariantJet<4> j;
  j.u = Vec<4>(1.01, 0, 0, 0);
  EXPECT_THROW(integrate(charts::minkowski<4>(), j, KawaguchiLagrangian{}, IntegratorConfig{}), GaugeViolated);
}

TEST(Integrate, HorizonCrossingTruncates) {
  const auto chart = charts::schwarzschild(1.0);
  const auto geo = chart.at(Vec<4>(0, 3.0, std::numbers::pi / 2, 0));
  CovariantJet<4> j;
  j.x = geo.x;
  j.u = Vec<4>(2.0, -0.3, 0, 0);
  j.u /= std::sqrt(geo.inner(j.u, j.u));
  IntegratorConfig cfg;
  cfg.step = 1e-4;
  cfg.horizon = 5.0;
  cfg.drift_abort = 1e-1;
  const auto traj = integrate(chart, j, KawaguchiLagrangian{1.0}, cfg);
  EXPECT_TRUE(traj.truncated());
  // t diverges at the horizon, so the gauge monitor may trip before the
  // r > 2M guard does.
  EXPECT_TRUE(traj.termination == Termination::OutOfChart || traj.termination == Termination::GaugeViolated);
  EXPECT_LT(traj.samples.back().jet.x[1], 2.01);
  EXPECT_GT(traj.samples.size(), 1u);
}

TEST(Integrate, SchwarzschildCircularGeodesicKeepsGauge) {
  const auto chart = charts::schwarzschild(1.0);
  CovariantJet<4> j;
  j.x = Vec<4>(0, 10.0, std::numbers::pi / 2, 0);
  j.u = charts::schwarzschild_circular_velocity(1.0, 10.0);
  IntegratorConfig cfg;
  cfg.horizon = 100.0;
  cfg.step = 1e-2;
  cfg.sample_every = 100;
  const auto traj = integrate(chart, j, KawaguchiLagrangian{1.0}, cfg);
  ASSERT_TRUE(traj.completed()) << traj.message;
  EXPECT_LE(traj.max_gamma_drift, 1e-6);
  EXPECT_NEAR(traj.samples.back().jet.x[1], 10.0, 1e-8);
}

TEST(Dixon, StateExamples) {
  const auto chart = charts::schwarzschild(1.0);
  test::Rng rng(5);
  auto j = random_natural_jet(Builtin::Schwarzschild, rng);
  const auto geo = chart.at(j.x);
  const auto d = dixon_state(geo, j, KawaguchiLagrangian{2.0});
  EXPECT_EQ(d.S + d.S.transpose(), Mat<4>::Zero());
  const Vec<4> ul = geo.lower(j.u), u1l = geo.lower(j.u1);
  EXPECT_LE((d.S - 2.0 * (ul * u1l.transpose() - u1l * ul.transpose())).cwiseAbs().maxCoeff(), 1e-12);

  CovariantJet<4> geo_jet;
  geo_jet.x = j.x;
  geo_jet.u = j.u;
  const auto dg = dixon_state(geo, geo_jet, KawaguchiLagrangian{2.0});
  EXPECT_EQ(dg.S, Mat<4>::Zero());
  EXPECT_LE((dg.P - 2.0 * ul).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dixon, SpinForceEqualsCurvatureCoupling) {
  test::Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    auto j = random_natural_jet(Builtin::Schwarzschild, rng);
    const auto geo = test::make_chart(Builtin::Schwarzschild).at(j.x);
    const auto m = momenta_general(geo, j, KawaguchiLagrangian{1.0});
    const auto d = dixon_from_momenta<4>(geo, j.u, m);
    const Vec<4> f = spin_curvature_force<4>(geo, j.u, d.S);
    const Vec<4> c = curvature_coupling<4>(geo.curvature, m.pi1, j.u);
    EXPECT_LE((f - c).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()));
  }
}

TEST(Dixon, SecondRelationOnArbitraryCurves) {
  for (Builtin b : {Builtin::Minkowski, Builtin::Schwarzschild, Builtin::DeSitter}) {
    const auto chart = test::make_chart(b);
    test::Rng rng(7);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Vec<4> x0 = test::interior_point(b, rng);
      const auto curve = random_polynomial_curve(chart, x0, test::timelike_vector(chart, x0, rng), rng);
      worst = std::max(worst, dixon_second_residual(chart, curve, 0.1, KawaguchiLagrangian{1.5}));
      worst = std::max(worst, dixon_second_residual(chart, curve, -0.2, QuarticCurvatureLagrangian{0.1}));
    }
    EXPECT_LE(worst, 1e-9) << test::name(b);
  }
}

TEST(Dixon, FirstRelationAlongSchwarzschildTrajectory) {
  const auto chart = charts::schwarzschild(1.0);
  const auto j = spin_jet(chart, 10.0, 0.05, 2.0);
  const KawaguchiLagrangian lag{riewe_constraint_A(-0.05 * 0.05 * 16.0, 2.0)};
  IntegratorConfig cfg;
  cfg.horizon = 50.0;
  const auto traj = integrate(chart, j, lag, cfg);
  ASSERT_TRUE(traj.completed()) << traj.message;
  const auto res = dixon_first_residual(chart, traj);
  EXPECT_GT(res.cases, 49000u);
  EXPECT_LE(res.max_residual, 1e-5);
}

TEST(Helix, BalanceConditionReproducesConstraint) {
  for (double w : {0.5, 1.0, 2.0})
    for (double alpha : {-0.1, -4.0}) {
      const KawaguchiLagrangian on{riewe_constraint_A(alpha, w)}, off{riewe_constraint_A(alpha, w) + 0.5};
      EXPECT_NEAR(helix_balance(on, alpha, w), 0.0, 1e-12);
      EXPECT_GT(std::abs(helix_balance(off, alpha, w)), 0.1);
    }
}

TEST(Helix, SecondLagrangianRadiusGivesExtremal) {
  const QuarticCurvatureLagrangian lag{0.1};
  const double r = helix_radius(lag, 2.0);
  // closed form: 3.5 c a^2 + 2 c w^2 a - 1/2 = 0 with a = r^2 w^4
  const double a = (-0.8 + std::sqrt(0.64 + 0.7)) / 0.7;
  EXPECT_NEAR(r, std::sqrt(a) / 4.0, 1e-12);
  const auto h = riewe_helix(r, 2.0);
  for (double s : {0.0, 0.9})
    EXPECT_LE(euler_poisson_covariant(charts::minkowski<4>(), h.jet(s), lag).E.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dixon, FirstRelationSecondLagrangian) {
  const auto chart = charts::schwarzschild(1.0);
  const QuarticCurvatureLagrangian lag{0.1};
  const auto j = spin_jet(chart, 10.0, helix_radius(lag, 2.0), 2.0);
  IntegratorConfig cfg;
  cfg.horizon = 50.0;
  const auto traj = integrate(chart, j, lag, cfg);
  ASSERT_TRUE(traj.completed()) << traj.message;
  EXPECT_LE(dixon_first_residual(chart, traj).max_residual, 1e-5);
}
