#pragma once

// Brute-force mixture density in long double: explicit cofactor inverse and
// determinant for blocks of size at most 3, direct summation of the
// component densities.

#include <cmath>
#include <vector>

#include "bvarsv/forecast.hpp"

namespace testutil {

using LMat = std::vector<std::vector<long double>>;

inline long double det_small(const LMat& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

inline LMat inverse_small(const LMat& a) {
  const std::size_t n = a.size();
  const long double d = det_small(a);
  LMat inv(n, std::vector<long double>(n));
  if (n == 1) {
    inv[0][0] = 1.0L / d;
    return inv;
  }
  if (n == 2) {
    inv[0][0] = a[1][1] / d;
    inv[1][1] = a[0][0] / d;
    inv[0][1] = -a[0][1] / d;
    inv[1][0] = -a[1][0] / d;
    return inv;
  }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / d;
    }
  return inv;
}

inline long double brute_force_lpl(const bvarsv::PredictiveMixture& mix, const Eigen::VectorXd& y,
                                   const std::vector<int>& subset) {
  const std::size_t k = subset.size();
  const long double two_pi = 6.283185307179586476925286766559L;
  long double total = 0.0L;
  for (const auto& c : mix.components) {
    LMat S(k, std::vector<long double>(k));
    std::vector<long double> r(k);
    for (std::size_t a = 0; a < k; ++a) {
      r[a] = static_cast<long double>(y(subset[a])) - c.mean(subset[a]);
      for (std::size_t b = 0; b < k; ++b) S[a][b] = c.cov(subset[a], subset[b]);
    }
    const LMat inv = inverse_small(S);
    long double q = 0.0L;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) q += r[a] * inv[a][b] * r[b];
    total += std::exp(-0.5L * q) / std::sqrt(std::pow(two_pi, static_cast<long double>(k)) * det_small(S));
  }
  return std::log(total / static_cast<long double>(mix.components.size()));
}

// A fixed three-component trivariate mixture with well-separated components.
inline bvarsv::PredictiveMixture synthetic_mixture() {
  bvarsv::PredictiveMixture mix;
  bvarsv::Rng rng(31);
  for (int c = 0; c < 3; ++c) {
    bvarsv::PredictiveComponent comp;
    comp.mean = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * (1.0 + c);
    Eigen::Matrix3d B;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B(i, j) = rng.normal();
    comp.cov = B * B.transpose() + (0.2 + 0.5 * c) * Eigen::Matrix3d::Identity();
    mix.components.push_back(comp);
  }
  return mix;
}

}  // namespace testutil
