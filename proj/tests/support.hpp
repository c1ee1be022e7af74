#pragma once

// Shared fixtures for the unit suites: seeded generators and chart-interior
// sampling. Oracles that must stay independent of the library live in the
// individual test files.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>

#include "wk/charts.hpp"
#include "wk/geometry.hpp"

namespace wk::test {

inline std::uint64_t seed() {
  if (const char* s = std::getenv("WK_SEED")) return std::strtoull(s, nullptr, 10);
  return 42;
}

class Rng {
 public:
  using result_type = std::mt19937_64::result_type;
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return gen_(); }

  explicit Rng(std::uint64_t salt = 0) : gen_(seed() + salt) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  template <std::size_t N>
  Vec<N> vec(double lo, double hi) {
    Vec<N> v;
    for (std::size_t i = 0; i < N; ++i) v[i] = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

enum class Builtin { Minkowski, Schwarzschild, DeSitter };

inline SpacetimeChart<4> make_chart(Builtin b) {
  switch (b) {
    case Builtin::Minkowski: return charts::minkowski<4>();
    case Builtin::Schwarzschild: return charts::schwarzschild(1.0);
    case Builtin::DeSitter: return charts::de_sitter(0.1);
  }
  throw Error("unknown chart");
}

inline std::string name(Builtin b) {
  switch (b) {
    case Builtin::Minkowski: return "minkowski";
    case Builtin::Schwarzschild: return "schwarzschild";
    case Builtin::DeSitter: return "desitter";
  }
  return "?";
}

inline Vec<4> interior_point(Builtin b, Rng& rng) {
  Vec<4> x = rng.vec<4>(-2.0, 2.0);
  if (b == Builtin::Schwarzschild) {
    x[1] = rng.uniform(4.0, 20.0);
    x[2] = rng.uniform(0.3, std::numbers::pi - 0.3);
    x[3] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return x;
}

// A timelike vector at x: a unit-ish time component plus a small spatial part.
inline Vec<4> timelike_vector(const SpacetimeChart<4>& chart, const Vec<4>& x, Rng& rng) {
  const Mat<4> g = chart.metric(x);
  for (;;) {
    Vec<4> u = rng.vec<4>(-0.3, 0.3);
    u[0] = 1.0 / std::sqrt(std::abs(g(0, 0))) * rng.uniform(1.0, 1.5);
    for (int i = 1; i < 4; ++i) u[i] /= std::sqrt(std::abs(g(i, i)));
    if (u.dot(g * u) > 0.2) return u;
  }
}

}  // namespace wk::test
