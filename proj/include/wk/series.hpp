#pragma once

// Forward-mode differentiation helpers.
//
//   Series<K>  truncated Taylor polynomial in the evolution parameter,
//              c[i] = f^(i)(0) / i!, used to push scalar invariants and
//              Lagrangian partials along a curve.
//   Dual<T>    first-order dual number over any scalar T, used to take
//              partial derivatives of an invariant Lagrangian.
//
// Dual<Series<K>> therefore yields "partial derivative of L, expanded to
// order K along the curve" without any finite differencing.

#include <array>
#include <cmath>
#include <cstddef>

namespace wk {

template <std::size_t K>
struct Series {
  std::array<double, K + 1> c{};

  Series() = default;
  Series(double v) { c[0] = v; }  // NOLINT: implicit constant lift
  explicit Series(const std::array<double, K + 1>& coeffs) : c(coeffs) {}

  static Series from_derivatives(const std::array<double, K + 1>& d) {
    Series s;
    double fact = 1.0;
    for (std::size_t i = 0; i <= K; ++i) {
      if (i > 0) fact *= static_cast<double>(i);
      s.c[i] = d[i] / fact;
    }
    return s;
  }

  double value() const { return c[0]; }

  // i-th derivative with respect to the expansion parameter.
  double derivative(std::size_t i) const {
    double fact = 1.0;
    for (std::size_t j = 2; j <= i; ++j) fact *= static_cast<double>(j);
    return c[i] * fact;
  }

  Series& operator+=(const Series& o) {
    for (std::size_t i = 0; i <= K; ++i) c[i] += o.c[i];
    return *this;
  }
  Series& operator-=(const Series& o) {
    for (std::size_t i = 0; i <= K; ++i) c[i] -= o.c[i];
    return *this;
  }
  Series& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

template <std::size_t K>
Series<K> operator-(Series<K> a) {
  for (auto& v : a.c) v = -v;
  return a;
}
template <std::size_t K>
Series<K> operator+(Series<K> a, const Series<K>& b) { return a += b; }
template <std::size_t K>
Series<K> operator-(Series<K> a, const Series<K>& b) { return a -= b; }
template <std::size_t K>
Series<K> operator+(Series<K> a, double b) { a.c[0] += b; return a; }
template <std::size_t K>
Series<K> operator+(double a, Series<K> b) { b.c[0] += a; return b; }
template <std::size_t K>
Series<K> operator-(Series<K> a, double b) { a.c[0] -= b; return a; }
template <std::size_t K>
Series<K> operator-(double a, const Series<K>& b) { return -b + a; }
template <std::size_t K>
Series<K> operator*(Series<K> a, double s) { return a *= s; }
template <std::size_t K>
Series<K> operator*(double s, Series<K> a) { return a *= s; }

template <std::size_t K>
Series<K> operator*(const Series<K>& a, const Series<K>& b) {
  Series<K> r;
  for (std::size_t k = 0; k <= K; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i <= k; ++i) acc += a.c[i] * b.c[k - i];
    r.c[k] = acc;
  }
  return r;
}

template <std::size_t K>
Series<K> operator/(const Series<K>& a, const Series<K>& b) {
  Series<K> q;
  for (std::size_t k = 0; k <= K; ++k) {
    double acc = a.c[k];
    for (std::size_t i = 1; i <= k; ++i) acc -= b.c[i] * q.c[k - i];
    q.c[k] = acc / b.c[0];
  }
  return q;
}
template <std::size_t K>
Series<K> operator/(const Series<K>& a, double b) { return a * (1.0 / b); }
template <std::size_t K>
Series<K> operator/(double a, const Series<K>& b) { return Series<K>(a) / b; }

// Real power; requires a.c[0] > 0 unless p is a non-negative integer.
template <std::size_t K>
Series<K> pow(const Series<K>& a, double p) {
  Series<K> y;
  y.c[0] = std::pow(a.c[0], p);
  for (std::size_t k = 1; k <= K; ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      acc += (p * static_cast<double>(j) - static_cast<double>(k - j)) * a.c[j] * y.c[k - j];
    }
    y.c[k] = acc / (static_cast<double>(k) * a.c[0]);
  }
  return y;
}

template <std::size_t K>
Series<K> sqrt(const Series<K>& a) { return pow(a, 0.5); }

template <class T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(double x) : v(x), d(0.0) {}  // NOLINT: implicit constant lift
  Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}
};

template <class T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = 1.0 / b.v;
  return {a.v * inv, (a.d * b.v - a.v * b.d) * inv * inv};
}
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double s) { return {a.v * s, a.d * s}; }
template <class T>
Dual<T> operator*(double s, const Dual<T>& a) { return {a.v * s, a.d * s}; }
template <class T>
Dual<T> operator/(const Dual<T>& a, double s) { return {a.v / s, a.d / s}; }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.v, p), p * pow(a.v, p - 1.0) * a.d};
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) { return pow(a, 0.5); }

}  // namespace wk
