#pragma once

// Arc-length integration of the extremal equation. The state is the jet
// (x, u, u', u'') in coordinates; u''' comes from the Euler-Poisson
// expression solved in natural gauge. For the Kawaguchi Lagrangian
//
//   u''' = 1/2 [ (A - 3 alpha) u' - 6 <u',u''> u + g^-1 F ],
//   F_n  = pi1_l R_nkm^l u^m u^k,   pi1 = 2 u'.
//
// Other Lagrangians go through a linear solve of E(u''') = 0 with the gauge
// row <u,u'''> = -3 <u',u''> appended.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/QR>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "wk/curves.hpp"
#include "wk/dixon.hpp"
#include "wk/errors.hpp"
#include "wk/geometry.hpp"
#include "wk/lagrangians.hpp"
#include "wk/numdiff.hpp"
#include "wk/variational.hpp"

namespace wk {

enum class StepMethod { Rk4, Rk45 };

struct IntegratorConfig {
  double step = 1e-3;
  double horizon = 10.0;
  StepMethod method = StepMethod::Rk4;
  double atol = 1e-10;  // Rk45 only
  double rtol = 1e-8;   // Rk45 only
  bool gauge_projection = true;
  double drift_abort = 1e-3;
  std::size_t sample_every = 1;

  void validate() const {
    if (!(step > 0.0)) throw ConfigError("integrator.step must be positive");
    if (!(horizon > 0.0)) throw ConfigError("integrator.horizon must be positive");
    if (!(atol > 0.0) || !(rtol > 0.0)) throw ConfigError("integrator tolerances must be positive");
    if (!(drift_abort > 0.0)) throw ConfigError("integrator.drift_abort must be positive");
    if (sample_every == 0) throw ConfigError("integrator.sample_every must be at least 1");
  }
};

struct Diagnostics {
  double gamma_drift = 0.0;  // |<u,u> - 1| before projection
  double beta_drift = 0.0;   // |<u,u'>| before projection
  double k2 = 0.0;
  double E_residual = 0.0;   // max |E_n| on the recorded jet
};

template <std::size_t N>
struct Sample {
  double s = 0.0;
  CovariantJet<N> jet;  // carries u'''
  Invariants inv;
  Momenta<N> momenta;
  DixonState<N> dixon;
  Diagnostics diag;
};

enum class Termination { Completed, GaugeViolated, OutOfChart, NonTimelike, StepUnderflow };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::GaugeViolated: return "gauge_violated";
    case Termination::OutOfChart: return "out_of_chart";
    case Termination::NonTimelike: return "non_timelike";
    case Termination::StepUnderflow: return "step_underflow";
  }
  return "unknown";
}

template <std::size_t N>
struct Trajectory {
  std::vector<Sample<N>> samples;
  Termination termination = Termination::Completed;
  std::string message;
  std::size_t steps = 0;
  double max_gamma_drift = 0.0;
  double max_beta_drift = 0.0;

  bool completed() const { return termination == Termination::Completed; }
  bool truncated() const { return !completed(); }
};

// ---------------------------------------------------------------------------
// Flat-space helix x(s) = x0 + b s e_0 + r cos(w s + phase) e_i + r sin(w s + phase) e_j
// with b^2 - r^2 w^2 = 1, solving x'''' + w^2 x'' = 0.

template <std::size_t N = 4>
struct RieweHelix {
  static_assert(N >= 3);
  double r = 0.0;
  double omega = 0.0;
  double b = 1.0;
  double phase = 0.0;
  std::size_t axis_i = 1, axis_j = 2;
  Vec<N> origin = Vec<N>::Zero();

  // k-th derivative of x at s, k = 0..4
  Vec<N> derivative(std::size_t k, double s) const {
    Vec<N> d = Vec<N>::Zero();
    if (k == 0) d = origin;
    if (k == 0) d[0] += b * s;
    if (k == 1) d[0] = b;
    const double th = omega * s + phase + static_cast<double>(k) * 0.5 * std::numbers::pi;
    const double amp = r * std::pow(omega, static_cast<double>(k));
    d[axis_i] += amp * std::cos(th);
    d[axis_j] += amp * std::sin(th);
    return d;
  }

  // alpha = <x'', x''> in (+,-,-,-)
  double alpha() const { return -r * r * std::pow(omega, 4); }
  double constraint_A() const { return riewe_constraint_A(alpha(), omega); }

  CovariantJet<N> jet(double s) const {
    CovariantJet<N> j;
    j.x = derivative(0, s);
    j.u = derivative(1, s);
    j.u1 = derivative(2, s);
    j.u2 = derivative(3, s);
    j.u3 = derivative(4, s);  // flat space: u''' is the fourth coordinate derivative
    j.param = s;
    j.natural = true;
    return j;
  }

  CoordinateCurve<N> curve(double s0, double s1) const {
    const RieweHelix self = *this;
    return CoordinateCurve<N>(
        [self](double s) {
          typename CoordinateCurve<N>::Derivatives d;
          for (std::size_t k = 0; k < 5; ++k) d[k] = self.derivative(k, s);
          return d;
        },
        s0, s1);
  }
};

template <std::size_t N = 4>
RieweHelix<N> riewe_helix(double r, double omega, std::size_t axis_i = 1, std::size_t axis_j = 2,
                          double phase = 0.0) {
  if (axis_i == 0 || axis_j == 0 || axis_i == axis_j || axis_i >= N || axis_j >= N)
    throw ConfigError("helix axes must be two distinct spatial indices");
  RieweHelix<N> h;
  h.r = r;
  h.omega = omega;
  h.b = std::sqrt(1.0 + r * r * omega * omega);
  h.phase = phase;
  h.axis_i = axis_i;
  h.axis_j = axis_j;
  return h;
}

// A flat helix of curvature alpha = -r^2 w^4 solves E = 0 iff
// L_gamma + w^2 L_alpha = 0 at (gamma, beta, alpha) = (1, 0, alpha). For the
// Kawaguchi Lagrangian this is A = 3 alpha - 2 w^2 for any radius.
template <InvariantLagrangian L>
double helix_balance(const L& lag, double alpha, double omega) {
  const auto p = lagrangian_partials(lag, 1.0, 0.0, alpha);
  return p[0] + omega * omega * p[2];
}

// Helix radius for which `lag` admits the flat helix of frequency omega,
// searched for r in (0, r_max].
template <InvariantLagrangian L>
double helix_radius(const L& lag, double omega, double r_max = 10.0) {
  auto f = [&](double r) { return helix_balance(lag, -r * r * std::pow(omega, 4), omega); };
  double lo = 1e-8, hi = r_max;
  if (f(lo) * f(hi) > 0.0) throw ConfigError("no helix radius in range for this Lagrangian and frequency");
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (root.first + root.second);
}

// Helix-like natural jet at x built on a local orthonormal frame: e0 along
// u_dir, e1 and e2 Gram-Schmidt from the given directions. In the frame the
// jet is that of the flat helix at s = 0, i.e. u = b e0 + r w e2,
// u' = -r w^2 e1, u'' = -r w^3 e2.
template <std::size_t N>
CovariantJet<N> helix_jet_in_frame(const LocalGeometry<N>& geo, const Vec<N>& u_dir, const Vec<N>& e1_dir,
                                   const Vec<N>& e2_dir, double r, double omega) {
  const double gu = geo.inner(u_dir, u_dir);
  if (!(gu > 0.0)) throw NonTimelike("helix frame: u direction is not timelike");
  const Vec<N> e0 = u_dir / std::sqrt(gu);
  auto orthonormal = [&](Vec<N> v, const std::vector<Vec<N>>& basis) {
    for (const auto& e : basis) v -= geo.inner(v, e) / geo.inner(e, e) * e;
    const double n = geo.inner(v, v);
    if (!(n < 0.0)) throw ConfigError("helix frame: spatial direction degenerates");
    return Vec<N>(v / std::sqrt(-n));
  };
  const Vec<N> e1 = orthonormal(e1_dir, {e0});
  const Vec<N> e2 = orthonormal(e2_dir, {e0, e1});
  const double b = std::sqrt(1.0 + r * r * omega * omega);
  CovariantJet<N> j;
  j.x = geo.x;
  j.u = b * e0 + r * omega * e2;
  j.u1 = -r * omega * omega * e1;
  j.u2 = -r * omega * omega * omega * e2;
  j.natural = true;
  return j;
}

// ---------------------------------------------------------------------------

namespace detail {

template <std::size_t N>
void check_natural(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, double tol, const char* who) {
  const double gamma = geo.inner(jet.u, jet.u);
  if (!(gamma > 0.0)) throw NonTimelike(std::string(who) + ": gamma = <u,u> is not positive");
  const double beta = geo.inner(jet.u, jet.u1);
  if (std::abs(gamma - 1.0) > tol || std::abs(beta) > tol)
    throw GaugeViolated(std::string(who) + ": jet is off natural gauge (|gamma-1| = " +
                        std::to_string(std::abs(gamma - 1.0)) + ", |beta| = " + std::to_string(std::abs(beta)) +
                        ")");
}

}  // namespace detail

// Closed-form u''' for the Kawaguchi Lagrangian in natural gauge.
template <std::size_t N>
Vec<N> solve_u3(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, const KawaguchiLagrangian& lag,
                double drift_abort = 1e-3) {
  detail::check_natural(geo, jet, drift_abort, "solve_u3");
  const double alpha = geo.inner(jet.u1, jet.u1);
  const double eps = geo.inner(jet.u1, jet.u2);
  const Vec<N> pi1 = 2.0 * geo.lower(jet.u1);
  const Vec<N> F = kCouplingSign * curvature_coupling<N>(geo.curvature, pi1, jet.u);
  return 0.5 * ((lag.A - 3.0 * alpha) * jet.u1 - 6.0 * eps * jet.u + geo.raise(F));
}

// u''' for any invariant Lagrangian. E is affine in u''', so its matrix is
// read off from N+1 evaluations; the degenerate direction along u is fixed by
// the natural-gauge condition beta'' = 0.
template <std::size_t N, InvariantLagrangian L>
Vec<N> solve_u3_general(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, const L& lag,
                        double drift_abort = 1e-3) {
  detail::check_natural(geo, jet, drift_abort, "solve_u3_general");
  CovariantJet<N> probe = jet;
  probe.u3 = Vec<N>::Zero();
  const Vec<N> E0 = euler_poisson_covariant(geo, probe, lag).E;

  Eigen::Matrix<double, static_cast<int>(N) + 1, static_cast<int>(N)> M;
  Eigen::Matrix<double, static_cast<int>(N) + 1, 1> rhs;
  for (std::size_t j = 0; j < N; ++j) {
    probe.u3 = Vec<N>::Unit(j);
    M.template block<static_cast<int>(N), 1>(0, static_cast<int>(j)) = euler_poisson_covariant(geo, probe, lag).E - E0;
  }
  M.row(static_cast<int>(N)) = geo.lower(jet.u).transpose();
  rhs.template head<static_cast<int>(N)>() = -E0;
  rhs[static_cast<int>(N)] = -3.0 * geo.inner(jet.u1, jet.u2);

  const auto qr = M.colPivHouseholderQr();
  if (qr.rank() < static_cast<int>(N))
    throw GaugeViolated("solve_u3_general: principal symbol is degenerate beyond the gauge direction");
  return qr.solve(rhs);
}

template <std::size_t N, InvariantLagrangian L>
Vec<N> solve_u3_any(const LocalGeometry<N>& geo, const CovariantJet<N>& jet, const L& lag,
                    double drift_abort = 1e-3) {
  if constexpr (std::is_same_v<L, KawaguchiLagrangian>)
    return solve_u3(geo, jet, lag, drift_abort);
  else
    return solve_u3_general(geo, jet, lag, drift_abort);
}

// Re-normalizes u, removes the u-component of u', and sets <u,u''> = -alpha
// so that beta' = 0 holds exactly as well.
template <std::size_t N>
void project_natural(const LocalGeometry<N>& geo, CovariantJet<N>& jet) {
  const double gamma = geo.inner(jet.u, jet.u);
  if (!(gamma > 0.0)) throw NonTimelike("projection: gamma = <u,u> is not positive");
  jet.u /= std::sqrt(gamma);
  jet.u1 -= geo.inner(jet.u, jet.u1) * jet.u;
  const double alpha = geo.inner(jet.u1, jet.u1);
  jet.u2 -= (geo.inner(jet.u, jet.u2) + alpha) * jet.u;
  jet.natural = true;
}

template <std::size_t N>
void project_natural(const SpacetimeChart<N>& chart, CovariantJet<N>& jet) {
  project_natural(chart.at(jet.x), jet);
}

// ---------------------------------------------------------------------------

namespace detail {

template <std::size_t N>
using State = std::array<double, 4 * N>;

template <std::size_t N>
State<N> pack(const CovariantJet<N>& j) {
  State<N> y;
  for (std::size_t i = 0; i < N; ++i) {
    y[i] = j.x[i];
    y[N + i] = j.u[i];
    y[2 * N + i] = j.u1[i];
    y[3 * N + i] = j.u2[i];
  }
  return y;
}

template <std::size_t N>
CovariantJet<N> unpack(const State<N>& y, double s) {
  CovariantJet<N> j;
  for (std::size_t i = 0; i < N; ++i) {
    j.x[i] = y[i];
    j.u[i] = y[N + i];
    j.u1[i] = y[2 * N + i];
    j.u2[i] = y[3 * N + i];
  }
  j.param = s;
  return j;
}

template <std::size_t N, class L>
struct ExtremalSystem {
  const SpacetimeChart<N>* chart;
  const L* lag;
  double drift_abort;

  // Ordinary derivatives of the coordinates of (x, u, u', u'') from the
  // covariant ones: d a/ds = a' - Gamma(a, u).
  void operator()(const State<N>& y, State<N>& dy, double s) const {
    const CovariantJet<N> j = unpack<N>(y, s);
    const LocalGeometry<N> geo = chart->at(j.x);
    const Vec<N> u3 = solve_u3_any(geo, j, *lag, drift_abort);
    const Vec<N> du = j.u1 - geo.contract(j.u, j.u);
    const Vec<N> du1 = j.u2 - geo.contract(j.u1, j.u);
    const Vec<N> du2 = u3 - geo.contract(j.u2, j.u);
    for (std::size_t i = 0; i < N; ++i) {
      dy[i] = j.u[i];
      dy[N + i] = du[i];
      dy[2 * N + i] = du1[i];
      dy[3 * N + i] = du2[i];
    }
  }
};

template <std::size_t N, InvariantLagrangian L>
Sample<N> make_sample(const SpacetimeChart<N>& chart, CovariantJet<N> jet, const L& lag, double drift_abort,
                      double gamma_drift, double beta_drift) {
  const LocalGeometry<N> geo = chart.at(jet.x);
  jet.u3 = solve_u3_any(geo, jet, lag, drift_abort);
  Sample<N> smp;
  smp.s = jet.param;
  smp.inv = invariants_at(geo, jet);
  smp.momenta = momenta_general(geo, jet, lag);
  smp.dixon = dixon_from_momenta<N>(geo, jet.u, smp.momenta);
  smp.diag.gamma_drift = gamma_drift;
  smp.diag.beta_drift = beta_drift;
  smp.diag.k2 = frenet_curvature(smp.inv);
  smp.diag.E_residual = euler_poisson_covariant(geo, jet, lag).E.cwiseAbs().maxCoeff();
  smp.jet = std::move(jet);
  return smp;
}

}  // namespace detail

// Integrates from initial.param to initial.param + horizon. Failures after the
// first step do not throw: the trajectory keeps the samples recorded so far
// and reports the reason in `termination`.
template <std::size_t N, InvariantLagrangian L>
Trajectory<N> integrate(const SpacetimeChart<N>& chart, CovariantJet<N> initial, const L& lag,
                        const IntegratorConfig& cfg) {
  namespace ode = boost::numeric::odeint;
  cfg.validate();
  detail::check_natural(chart.at(initial.x), initial, kGaugeTolerance, "integrate");

  Trajectory<N> traj;
  const double s0 = initial.param;
  const double s_end = s0 + cfg.horizon;
  const detail::ExtremalSystem<N, L> sys{&chart, &lag, cfg.drift_abort};

  {
    const auto geo = chart.at(initial.x);
    const double g0 = std::abs(geo.inner(initial.u, initial.u) - 1.0);
    const double b0 = std::abs(geo.inner(initial.u, initial.u1));
    traj.samples.push_back(detail::make_sample(chart, initial, lag, cfg.drift_abort, g0, b0));
  }

  detail::State<N> y = detail::pack(initial);
  double s = s0;
  std::size_t accepted = 0;

  auto finish_step = [&](double s_new) {
    CovariantJet<N> jet = detail::unpack<N>(y, s_new);
    const auto geo = chart.at(jet.x);
    const double gd = std::abs(geo.inner(jet.u, jet.u) - 1.0);
    const double bd = std::abs(geo.inner(jet.u, jet.u1));
    traj.max_gamma_drift = std::max(traj.max_gamma_drift, gd);
    traj.max_beta_drift = std::max(traj.max_beta_drift, bd);
    if (gd > cfg.drift_abort || bd > cfg.drift_abort)
      throw GaugeViolated("gauge drift exceeded drift_abort at s = " + std::to_string(s_new));
    if (cfg.gauge_projection) {
      project_natural(geo, jet);
      y = detail::pack(jet);
    }
    ++accepted;
    const bool last = s_new >= s_end - 1e-12 * std::max(1.0, std::abs(s_end));
    if (accepted % cfg.sample_every == 0 || last)
      traj.samples.push_back(detail::make_sample(chart, jet, lag, cfg.drift_abort, gd, bd));
    return last;
  };

  try {
    if (cfg.method == StepMethod::Rk4) {
      ode::runge_kutta4<detail::State<N>> stepper;
      const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.step - 1e-9));
      for (std::size_t n = 0; n < n_steps; ++n) {
        const double s_next = (n + 1 == n_steps) ? s_end : s0 + static_cast<double>(n + 1) * cfg.step;
        stepper.do_step(sys, y, s, s_next - s);
        s = s_next;
        finish_step(s);
      }
    } else {
      auto stepper = ode::make_controlled(cfg.atol, cfg.rtol, ode::runge_kutta_dopri5<detail::State<N>>());
      double dt = cfg.step;
      bool done = false;
      while (!done) {
        const double trial = std::min(dt, s_end - s);
        if (trial < 1e-14 * std::max(1.0, std::abs(s)))
          throw StepUnderflow("adaptive step fell below 1e-14 at s = " + std::to_string(s));
        double t = s, h = trial;
        if (stepper.try_step(sys, y, t, h) == ode::success) {
          s = (trial == s_end - s) ? s_end : t;
          dt = std::min(h, cfg.step);
          done = finish_step(s);
        } else {
          dt = h;
        }
      }
    }
  } catch (const GaugeViolated& e) {
    traj.termination = Termination::GaugeViolated;
    traj.message = e.what();
  } catch (const OutOfChart& e) {
    traj.termination = Termination::OutOfChart;
    traj.message = e.what();
  } catch (const NonTimelike& e) {
    traj.termination = Termination::NonTimelike;
    traj.message = e.what();
  } catch (const StepUnderflow& e) {
    traj.termination = Termination::StepUnderflow;
    traj.message = e.what();
  }
  traj.steps = accepted;
  return traj;
}

// ---------------------------------------------------------------------------
// First Dixon relation along a trajectory. P' is a five-point stencil over
// consecutive samples corrected to a covariant derivative:
//   P'_n = dP_n/ds - Gamma^m_ln P_m u^l.
// Each residual is |P' + 1/2 R u S| / max(|P'|, 1), max norms. Stencils that
// straddle uneven sample spacing are skipped.

template <std::size_t N>
DixonResidualSummary dixon_first_residual(const SpacetimeChart<N>& chart, const Trajectory<N>& traj) {
  DixonResidualSummary out;
  const auto& sm = traj.samples;
  if (sm.size() < 5) return out;
  for (std::size_t i = 2; i + 2 < sm.size(); ++i) {
    const double h = sm[i + 1].s - sm[i].s;
    bool uniform = true;
    for (std::size_t k = i - 2; k < i + 2; ++k)
      uniform = uniform && std::abs((sm[k + 1].s - sm[k].s) - h) <= 1e-9 * h;
    if (!uniform) continue;
    const Vec<N> dP = numdiff::five_point_from_samples<Vec<N>>(sm[i - 2].dixon.P, sm[i - 1].dixon.P,
                                                                sm[i + 1].dixon.P, sm[i + 2].dixon.P, h);
    const auto geo = chart.at(sm[i].jet.x);
    const Vec<N>& u = sm[i].jet.u;
    const Vec<N>& P = sm[i].dixon.P;
    Vec<N> Pp = dP;
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t m = 0; m < N; ++m) Pp[n] -= P[m] * geo.gamma()[m].col(n).dot(u);
    const Vec<N> r = Pp + spin_curvature_force<N>(geo, u, sm[i].dixon.S);
    const double res = r.cwiseAbs().maxCoeff() / std::max(1.0, Pp.cwiseAbs().maxCoeff());
    out.max_residual = std::max(out.max_residual, res);
    ++out.cases;
  }
  return out;
}

}  // namespace wk
