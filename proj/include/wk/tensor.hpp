#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace wk {

// Fixed-dimension storage. Vectors and covectors share one representation;
// which one a value is follows from where it came from (lower() / raise()).
template <std::size_t N>
using Vec = Eigen::Matrix<double, static_cast<int>(N), 1>;

template <std::size_t N>
using Mat = Eigen::Matrix<double, static_cast<int>(N), static_cast<int>(N)>;

// t[a](b, c)
template <std::size_t N>
using Rank3 = std::array<Mat<N>, N>;

// t[a][b](c, d)
template <std::size_t N>
using Rank4 = std::array<std::array<Mat<N>, N>, N>;

template <std::size_t N>
Rank3<N> zero_rank3() {
  Rank3<N> t;
  t.fill(Mat<N>::Zero());
  return t;
}

template <std::size_t N>
Rank4<N> zero_rank4() {
  Rank4<N> t;
  for (auto& row : t) row.fill(Mat<N>::Zero());
  return t;
}

template <std::size_t N>
double max_abs(const Rank3<N>& t) {
  double m = 0.0;
  for (const auto& a : t) m = std::max(m, a.cwiseAbs().maxCoeff());
  return m;
}

template <std::size_t N>
double max_abs(const Rank4<N>& t) {
  double m = 0.0;
  for (const auto& a : t)
    for (const auto& b : a) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

// Number of independent components of a 2-form, (N choose 2).
template <std::size_t N>
inline constexpr std::size_t kPairCount = N * (N - 1) / 2;

}  // namespace wk
