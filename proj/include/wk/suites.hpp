#pragma once

// Named verification suites. Each check reports the largest residual seen
// over its cases against a tolerance; the CLI prints them as JSON and the
// acceptance binary pins its own bounds on the same numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wk/charts.hpp"
#include "wk/curves.hpp"
#include "wk/dixon.hpp"
#include "wk/dynamics.hpp"
#include "wk/geometry.hpp"
#include "wk/lagrangians.hpp"
#include "wk/oracles.hpp"
#include "wk/variational.hpp"

namespace wk::suites {

struct CheckReport {
  std::string check_name;
  std::size_t n_cases = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string note;  // set when the check could not run to completion
};

inline std::uint64_t env_seed() {
  if (const char* s = std::getenv("WK_SEED")) return std::strtoull(s, nullptr, 10);
  return 42;
}

struct SuiteOptions {
  std::uint64_t seed = env_seed();
  std::size_t curves_per_chart = 50;
  std::size_t zermelo_points = 100;
  std::size_t geometry_points = 100;
  std::size_t action_pairs = 10;
  double dixon_horizon = 50.0;
};

enum class Builtin { Minkowski, Schwarzschild, DeSitter };

inline const std::array<Builtin, 3>& builtins() {
  static const std::array<Builtin, 3> all{Builtin::Minkowski, Builtin::Schwarzschild, Builtin::DeSitter};
  return all;
}

inline std::string builtin_name(Builtin b) {
  switch (b) {
    case Builtin::Minkowski: return "minkowski";
    case Builtin::Schwarzschild: return "schwarzschild";
    case Builtin::DeSitter: return "desitter";
  }
  return "?";
}

// Mass 1 and Hubble rate 0.1 throughout the suites.
inline SpacetimeChart<4> builtin_chart(Builtin b) {
  switch (b) {
    case Builtin::Minkowski: return charts::minkowski<4>();
    case Builtin::Schwarzschild: return charts::schwarzschild(1.0);
    case Builtin::DeSitter: return charts::de_sitter(0.1);
  }
  throw ConfigError("unknown built-in chart");
}

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Vec<4> sample_point(Builtin b, Rng& rng) {
  Vec<4> x;
  for (int i = 0; i < 4; ++i) x[i] = uniform(rng, -2.0, 2.0);
  if (b == Builtin::Schwarzschild) {
    x[1] = uniform(rng, 4.0, 20.0);
    x[2] = uniform(rng, 0.3, std::numbers::pi - 0.3);
    x[3] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  return x;
}

// Timelike vector with unit-order proper time rate and spatial components
// up to 0.3 in proper-length units.
inline Vec<4> sample_velocity(const SpacetimeChart<4>& chart, const Vec<4>& x, Rng& rng) {
  const Mat<4> g = chart.metric(x);
  for (;;) {
    Vec<4> u;
    u[0] = uniform(rng, 1.0, 1.5) / std::sqrt(std::abs(g(0, 0)));
    for (int i = 1; i < 4; ++i) u[i] = uniform(rng, -0.3, 0.3) / std::sqrt(std::abs(g(i, i)));
    if (u.dot(g * u) > 0.2) return u;
  }
}

inline double rel_max(const Vec<4>& a, const Vec<4>& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

namespace detail {

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline CheckReport finish(std::string name, std::size_t n, double worst, double tol, const Timer& t) {
  CheckReport r;
  r.check_name = std::move(name);
  r.n_cases = n;
  r.max_residual = worst;
  r.tolerance = tol;
  r.pass = n > 0 && std::isfinite(worst) && worst <= tol;
  r.seconds = t.seconds();
  return r;
}

// Runs `body` and turns a library exception into a failed report.
inline CheckReport guarded(const std::string& name, double tol, const std::function<CheckReport()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    CheckReport r;
    r.check_name = name;
    r.tolerance = tol;
    r.max_residual = std::numeric_limits<double>::infinity();
    r.note = e.what();
    return r;
  }
}

inline Rng rng_for(const SuiteOptions& o, std::uint64_t salt) { return Rng(o.seed * 1000003u + salt); }

inline Vec<4> schwarzschild_spin_point() { return Vec<4>(0.0, 10.0, std::numbers::pi / 2, 0.0); }

// Helix-like jet on the circular orbit at r = 10 of Schwarzschild(M = 1).
inline CovariantJet<4> schwarzschild_spin_jet(const SpacetimeChart<4>& chart, double r, double omega) {
  const auto geo = chart.at(schwarzschild_spin_point());
  return helix_jet_in_frame<4>(geo, charts::schwarzschild_circular_velocity(1.0, 10.0), Vec<4>(0, 1, 0, 0),
                               Vec<4>(0, 0, 0, 1), r, omega);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Covariant Euler-Poisson expression against the coordinate oracle on random
// polynomial curves, plus the momentum relation p = pi + Gamma u pi1.

template <InvariantLagrangian L>
CheckReport proposition1_check(Builtin b, const L& lag, const std::string& lag_name, const SuiteOptions& o,
                               double tol = 1e-6) {
  const std::string name = "proposition1." + builtin_name(b) + "." + lag_name;
  return detail::guarded(name, tol, [&] {
    detail::Timer t;
    const auto chart = builtin_chart(b);
    const CoordinateLagrangian<4, L> Lc(chart, lag);
    Rng rng = detail::rng_for(o, 100 + static_cast<std::uint64_t>(b));
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < o.curves_per_chart; ++i) {
      const Vec<4> x0 = sample_point(b, rng);
      const auto curve = random_polynomial_curve<4>(chart, x0, sample_velocity(chart, x0, rng), rng);
      const double xi = uniform(rng, -0.5, 0.5);
      const Vec<4> oracle = coordinate_euler_poisson<4>(Lc, curve, xi);
      const auto jet = jet_coordinate_to_covariant(chart, curve.jet(xi), xi);
      const Vec<4> cov = euler_poisson_covariant(chart.at(jet.x), jet, lag).E;
      worst = std::max(worst, rel_max(cov, oracle));
      ++n;
    }
    return detail::finish(name, n, worst, tol, t);
  });
}

template <InvariantLagrangian L>
CheckReport momentum_relation_check(Builtin b, const L& lag, const std::string& lag_name, const SuiteOptions& o,
                                    double tol = 1e-6) {
  const std::string name = "momentum_relation." + builtin_name(b) + "." + lag_name;
  return detail::guarded(name, tol, [&] {
    detail::Timer t;
    const auto chart = builtin_chart(b);
    const CoordinateLagrangian<4, L> Lc(chart, lag);
    Rng rng = detail::rng_for(o, 200 + static_cast<std::uint64_t>(b));
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < o.curves_per_chart; ++i) {
      const Vec<4> x0 = sample_point(b, rng);
      const auto curve = random_polynomial_curve<4>(chart, x0, sample_velocity(chart, x0, rng), rng);
      const double xi = uniform(rng, -0.5, 0.5);
      const auto cm = coordinate_momenta<4>(Lc, curve, xi);
      const auto jet = jet_coordinate_to_covariant(chart, curve.jet(xi), xi);
      const auto geo = chart.at(jet.x);
      const auto m = momenta_general(geo, jet, lag);
      Vec<4> expected = m.pi;
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t q = 0; q < 4; ++q) expected[k] += m.pi1[q] * geo.gamma()[q].col(k).dot(jet.u);
      worst = std::max(worst, (cm.p - expected).cwiseAbs().maxCoeff() / std::max(1.0, cm.p.cwiseAbs().maxCoeff()));
      ++n;
    }
    return detail::finish(name, n, worst, tol, t);
  });
}

inline std::vector<CheckReport> proposition1(const SuiteOptions& o = {}) {
  std::vector<CheckReport> out;
  for (Builtin b : builtins()) {
    out.push_back(proposition1_check(b, KawaguchiLagrangian{1.3}, "kawaguchi", o));
    out.push_back(proposition1_check(b, QuarticCurvatureLagrangian{0.1}, "test2", o));
  }
  for (Builtin b : builtins()) out.push_back(momentum_relation_check(b, KawaguchiLagrangian{1.3}, "kawaguchi", o));
  return out;
}

// ---------------------------------------------------------------------------
// Zermelo identities on random coordinate data, and the zero set of E under
// the reparametrization phi(xi) = xi + 0.3 sin xi of the extremal helix.

inline std::array<double, 5> wobble(double xi) {
  return {xi + 0.3 * std::sin(xi), 1.0 + 0.3 * std::cos(xi), -0.3 * std::sin(xi), -0.3 * std::cos(xi),
          0.3 * std::sin(xi)};
}

template <InvariantLagrangian L>
CheckReport zermelo_check_chart(Builtin b, const L& lag, const std::string& lag_name, const SuiteOptions& o,
                                double tol = 1e-6) {
  const std::string name = "zermelo." + builtin_name(b) + "." + lag_name;
  return detail::guarded(name, tol, [&] {
    detail::Timer t;
    const auto chart = builtin_chart(b);
    const CoordinateLagrangian<4, L> Lc(chart, lag);
    Rng rng = detail::rng_for(o, 300 + static_cast<std::uint64_t>(b));
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < o.zermelo_points; ++i) {
      const Vec<4> x = sample_point(b, rng);
      const Vec<4> u = sample_velocity(chart, x, rng);
      const Mat<4> g = chart.metric(x);
      Vec<4> udot;
      for (int k = 0; k < 4; ++k) udot[k] = uniform(rng, -0.3, 0.3) / std::sqrt(std::abs(g(k, k)));
      const auto r = zermelo_check<4>(Lc, x, u, udot);
      const double scale = std::max(1.0, std::abs(Lc(x, u, udot)));
      worst = std::max({worst, std::abs(r.homogeneity) / scale, std::abs(r.transversal) / scale});
      ++n;
    }
    return detail::finish(name, n, worst, tol, t);
  });
}

inline CheckReport reparametrization_check(double tol = 1e-7) {
  const std::string name = "zermelo.reparametrized_helix";
  return detail::guarded(name, tol, [&] {
    detail::Timer t;
    const auto h = riewe_helix(0.5, 2.0);
    const auto chart = charts::minkowski<4>();
    const KawaguchiLagrangian lag{h.constraint_A()};
    const auto y = reparametrized<4>(h.curve(-4.0, 4.0), wobble, -3.0, 3.0);
    double worst = 0.0;
    std::size_t n = 0;
    for (int i = 0; i <= 60; ++i) {
      const double eta = -3.0 + 0.1 * i;
      const auto jet = jet_coordinate_to_covariant(chart, y.jet(eta), eta);
      worst = std::max(worst, euler_poisson_covariant(chart, jet, lag).E.cwiseAbs().maxCoeff());
      ++n;
    }
    return detail::finish(name, n, worst, tol, t);
  });
}

inline std::vector<CheckReport> zermelo(const SuiteOptions& o = {}) {
  std::vector<CheckReport> out;
  for (Builtin b : builtins()) {
    out.push_back(zermelo_check_chart(b, KawaguchiLagrangian{1.3}, "kawaguchi", o));
    out.push_back(zermelo_check_chart(b, QuarticCurvatureLagrangian{0.1}, "test2", o));
  }
  out.push_back(reparametrization_check());
  return out;
}

// ---------------------------------------------------------------------------
// Flat-space helix recovered by the arc-length integrator.

struct RieweOptions {
  double r = 0.5;
  double omega = 2.0;
  double horizon = 10.0;
  double step = 1e-3;
};

inline std::vector<CheckReport> riewe(const RieweOptions& ro = {}) {
  std::vector<CheckReport> out;
  const auto h = riewe_helix(ro.r, ro.omega);
  const KawaguchiLagrangian lag{h.constraint_A()};

  out.push_back(detail::guarded("riewe.helix_is_extremal", 1e-8, [&] {
    detail::Timer t;
    const auto chart = charts::minkowski<4>();
    double worst = 0.0;
    for (int i = 0; i <= 20; ++i)
      worst = std::max(worst, euler_poisson_covariant(chart, h.jet(0.5 * i), lag).E.cwiseAbs().maxCoeff());
    return detail::finish("riewe.helix_is_extremal", 21, worst, 1e-8, t);
  }));

  // E residual scan over A: the minimizer must be the constraint value.
  out.push_back(detail::guarded("riewe.constraint_scan", 1e-9, [&] {
    detail::Timer t;
    const auto chart = charts::minkowski<4>();
    const auto jet = h.jet(0.3);
    const double A0 = h.constraint_A();
    double best_A = 0.0, best = std::numeric_limits<double>::infinity();
    for (int i = -200; i <= 200; ++i) {
      const double A = A0 + 0.05 * i;
      const double e = euler_poisson_covariant(chart, jet, KawaguchiLagrangian{A}).E.norm();
      if (e < best) best = e, best_A = A;
    }
    return detail::finish("riewe.constraint_scan", 401, std::abs(best_A - A0), 1e-9, t);
  }));

  IntegratorConfig cfg;
  cfg.step = ro.step;
  cfg.horizon = ro.horizon;
  Trajectory<4> traj;
  detail::Timer t_int;
  std::string failure;
  try {
    traj = integrate(charts::minkowski<4>(), h.jet(0.0), lag, cfg);
    if (!traj.completed()) failure = traj.message;
  } catch (const std::exception& e) {
    failure = e.what();
  }
  const double elapsed = t_int.seconds();

  double pos = 0.0, k2 = 0.0;
  for (const auto& smp : traj.samples) {
    pos = std::max(pos, (smp.jet.x - h.derivative(0, smp.s)).cwiseAbs().maxCoeff());
    k2 = std::max(k2, std::abs(smp.diag.k2 - h.alpha()));
  }
  for (auto [name, worst, tol] : {std::tuple{"riewe.trajectory_sup_error", pos, 1e-6},
                                  std::tuple{"riewe.k2_drift", k2, 1e-7}}) {
    CheckReport r;
    r.check_name = name;
    r.n_cases = traj.samples.size();
    r.max_residual = failure.empty() ? worst : std::numeric_limits<double>::infinity();
    r.tolerance = tol;
    r.pass = failure.empty() && r.n_cases > 0 && worst <= tol;
    r.seconds = elapsed;
    r.note = failure;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dixon relations: the first along an integrated Schwarzschild trajectory,
// the second as an identity on arbitrary curves.

template <InvariantLagrangian L>
CheckReport dixon_first_check(const L& lag, const std::string& lag_name, double helix_r, double omega,
                              const SuiteOptions& o, double tol = 1e-5) {
  const std::string name = "dixon_first.schwarzschild." + lag_name;
  return detail::guarded(name, tol, [&] {
    detail::Timer t;
    const auto chart = charts::schwarzschild(1.0);
    IntegratorConfig cfg;
    cfg.horizon = o.dixon_horizon;
    const auto traj = integrate(chart, detail::schwarzschild_spin_jet(chart, helix_r, omega), lag, cfg);
    if (!traj.completed()) throw Error("integration truncated: " + traj.message);
    const auto res = dixon_first_residual(chart, traj);
    return detail::finish(name, res.cases, res.max_residual, tol, t);
  });
}

template <InvariantLagrangian L>
CheckReport dixon_second_check(Builtin b, const L& lag, const std::string& lag_name, const SuiteOptions& o,
                               double tol = 1e-9) {
  const std::string name = "dixon_second." + builtin_name(b) + "." + lag_name;
  return detail::guarded(name, tol, [&] {
    detail::Timer t;
    const auto chart = builtin_chart(b);
    Rng rng = detail::rng_for(o, 400 + static_cast<std::uint64_t>(b));
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      const Vec<4> x0 = sample_point(b, rng);
      const auto curve = random_polynomial_curve<4>(chart, x0, sample_velocity(chart, x0, rng), rng);
      worst = std::max(worst, dixon_second_residual(chart, curve, uniform(rng, -0.5, 0.5), lag));
      ++n;
    }
    return detail::finish(name, n, worst, tol, t);
  });
}

// Spin trajectory parameters: a helix of frequency 2 around the circular
// orbit at r = 10, of radius 0.05 with A on the Riewe surface for the
// Kawaguchi Lagrangian, and of the balanced radius for the second one.
inline std::vector<CheckReport> dixon(const SuiteOptions& o = {}) {
  std::vector<CheckReport> out;
  const double r = 0.05, w = 2.0;
  out.push_back(dixon_first_check(KawaguchiLagrangian{riewe_constraint_A(-r * r * std::pow(w, 4), w)},
                                  "kawaguchi", r, w, o));
  for (Builtin b : builtins()) out.push_back(dixon_second_check(b, KawaguchiLagrangian{1.3}, "kawaguchi", o));
  return out;
}

inline std::vector<CheckReport> proposition2(const SuiteOptions& o = {}) {
  std::vector<CheckReport> out;
  const QuarticCurvatureLagrangian lag{0.1};
  const double w = 2.0;
  out.push_back(detail::guarded("dixon_first.schwarzschild.test2", 1e-5, [&] {
    return dixon_first_check(lag, "test2", helix_radius(lag, w), w, o);
  }));
  for (Builtin b : builtins()) out.push_back(dixon_second_check(b, lag, "test2", o));
  return out;
}

// ---------------------------------------------------------------------------

inline std::vector<CheckReport> geometry(const SuiteOptions& o = {}) {
  std::vector<CheckReport> out;
  for (Builtin b : builtins()) {
    const auto chart = builtin_chart(b);
    out.push_back(detail::guarded("geometry.compatibility." + builtin_name(b), 1e-9, [&] {
      detail::Timer t;
      Rng rng = detail::rng_for(o, 500 + static_cast<std::uint64_t>(b));
      double worst = 0.0;
      for (std::size_t i = 0; i < o.geometry_points; ++i) {
        const Vec<4> x = sample_point(b, rng);
        worst = std::max(worst, compatibility_residual(chart.metric_jet(x, false), chart.christoffel_at(x, false)));
      }
      return detail::finish("geometry.compatibility." + builtin_name(b), o.geometry_points, worst, 1e-9, t);
    }));
    out.push_back(detail::guarded("geometry.riemann_antisymmetry." + builtin_name(b), 1e-10, [&] {
      detail::Timer t;
      Rng rng = detail::rng_for(o, 600 + static_cast<std::uint64_t>(b));
      double worst = 0.0;
      for (std::size_t i = 0; i < o.geometry_points; ++i)
        worst = std::max(worst, first_pair_antisymmetry(chart.at(sample_point(b, rng)).curvature));
      return detail::finish("geometry.riemann_antisymmetry." + builtin_name(b), o.geometry_points, worst, 1e-10,
                            t);
    }));
  }
  out.push_back(detail::guarded("geometry.flat_curvature", 0.0, [&] {
    detail::Timer t;
    Rng rng = detail::rng_for(o, 700);
    const auto chart = charts::minkowski<4>();
    double worst = 0.0;
    for (std::size_t i = 0; i < o.geometry_points; ++i) {
      const auto& R = chart.at(sample_point(Builtin::Minkowski, rng)).curvature.riemann;
      for (const auto& row : R)
        for (const auto& m : row) worst = std::max(worst, m.cwiseAbs().maxCoeff());
    }
    auto r = detail::finish("geometry.flat_curvature", o.geometry_points, worst, 0.0, t);
    r.pass = worst == 0.0;
    return r;
  }));
  return out;
}

// ---------------------------------------------------------------------------
// Central-difference derivative of the action against the pairing of E with
// the perturbation.

inline std::vector<CheckReport> action(const SuiteOptions& o = {}) {
  const std::string name = "action_variation";
  return {detail::guarded(name, 1e-4, [&] {
    detail::Timer t;
    Rng rng = detail::rng_for(o, 800);
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < o.action_pairs; ++i) {
      const Builtin b = builtins()[i % 3];
      const auto chart = builtin_chart(b);
      const Vec<4> x0 = sample_point(b, rng);
      const auto curve = random_polynomial_curve<4>(chart, x0, sample_velocity(chart, x0, rng), rng);
      const Mat<4> g = chart.metric(x0);
      Vec<4> dir;
      for (int k = 0; k < 4; ++k) dir[k] = uniform(rng, -0.3, 0.3) / std::sqrt(std::abs(g(k, k)));
      const double a = uniform(rng, -0.9, -0.3), c = uniform(rng, 0.3, 0.9);
      const auto bump = sin4_bump<4>(dir, a, c);
      const auto av = action_variation(chart, KawaguchiLagrangian{uniform(rng, -1.0, 2.0)}, curve, bump);
      worst = std::max(worst, std::abs(av.derivative - av.pairing) / std::abs(av.derivative));
      ++n;
    }
    return detail::finish(name, n, worst, 1e-4, t);
  })};
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"proposition1", "zermelo", "riewe", "dixon",
                                              "proposition2", "geometry", "action"};
  return names;
}

inline std::vector<CheckReport> run_suite(const std::string& suite, const SuiteOptions& o = {}) {
  if (suite == "proposition1") return proposition1(o);
  if (suite == "zermelo") return zermelo(o);
  if (suite == "riewe") return riewe();
  if (suite == "dixon") return dixon(o);
  if (suite == "proposition2") return proposition2(o);
  if (suite == "geometry") return geometry(o);
  if (suite == "action") return action(o);
  if (suite == "all") {
    std::vector<CheckReport> all;
    for (const auto& s : suite_names()) {
      auto part = run_suite(s, o);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw ConfigError("unknown suite '" + suite + "'");
}

}  // namespace wk::suites
