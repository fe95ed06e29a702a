#pragma once

// Dense oracle for one call of draw_phi_triangular with M = 2. The joint
// Gaussian conditional of vec(Phi) is assembled observation by observation
// from xi_t = A (y_t - (I kron x_t') vec(Phi)); the call draws column 0 given
// the input column 1, then column 1 given the new column 0, so the output
// pair is Gaussian with the composed mean and covariance below.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "bvarsv/core_model.hpp"
#include "bvarsv/random.hpp"
#include "bvarsv/sampler.hpp"

namespace testutil {

struct PhiOracleCase {
  Eigen::MatrixXd Y, X, phi_in, H, V;
  bvarsv::CovFactor factor;
};

inline PhiOracleCase phi_oracle_case(std::uint64_t seed = 77) {
  bvarsv::Rng rng(seed);
  const int T = 15, M = 2, K = 2;
  PhiOracleCase c;
  c.X.resize(T, K);
  c.Y.resize(T, M);
  c.H.resize(T, M);
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) c.X(t, k) = rng.normal();
    c.H(t, 0) = -1.0 + 1.5 * std::sin(0.7 * t);
    c.H(t, 1) = -2.0 + 0.8 * std::cos(0.4 * t);
  }
  c.factor = bvarsv::CovFactor(Eigen::VectorXd::Constant(1, 1.8));
  c.phi_in.resize(K, M);
  c.phi_in << 0.4, -0.3, 0.1, 0.6;
  const Eigen::MatrixXd A = c.factor.A(M);
  const Eigen::MatrixXd Ainv = A.inverse();
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd xi(M);
    for (int j = 0; j < M; ++j) xi(j) = std::exp(0.5 * c.H(t, j)) * rng.normal();
    c.Y.row(t) = (c.phi_in.transpose() * c.X.row(t).transpose() + Ainv * xi).transpose();
  }
  c.V.resize(K, M);
  c.V << 2.0, 0.5, 1.0, 3.0;
  return c;
}

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Full conditional of vec(Phi) given l, H, V: precision and mean.
inline GaussianMoments dense_joint_conditional(const PhiOracleCase& c) {
  const int T = static_cast<int>(c.Y.rows()), M = static_cast<int>(c.Y.cols()), K = static_cast<int>(c.X.cols());
  const int n = K * M;
  const Eigen::MatrixXd A = c.factor.A(M);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) P(j, j) = 1.0 / c.V(j % K, j / K);
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(M, n);  // I kron x_t'
    for (int i = 0; i < M; ++i) Z.block(i, i * K, 1, K) = c.X.row(t);
    const Eigen::MatrixXd AZ = A * Z;
    Eigen::VectorXd dinv(M);
    for (int i = 0; i < M; ++i) dinv(i) = std::exp(-c.H(t, i));
    P += AZ.transpose() * dinv.asDiagonal() * AZ;
    b += AZ.transpose() * dinv.asDiagonal() * (A * c.Y.row(t).transpose());
  }
  GaussianMoments g;
  g.cov = P.inverse();
  g.mean = g.cov * b;
  return g;
}

// Distribution of the output of one sequential call (column 0 then column 1).
inline GaussianMoments one_call_distribution(const PhiOracleCase& c) {
  const int K = static_cast<int>(c.X.cols());
  const GaussianMoments joint = dense_joint_conditional(c);
  const Eigen::MatrixXd P = joint.cov.inverse();
  const Eigen::MatrixXd P00 = P.topLeftCorner(K, K), P01 = P.topRightCorner(K, K);
  const Eigen::MatrixXd P10 = P.bottomLeftCorner(K, K), P11 = P.bottomRightCorner(K, K);
  const Eigen::VectorXd m0 = joint.mean.head(K), m1 = joint.mean.tail(K);
  const Eigen::MatrixXd S0 = P00.inverse(), S1 = P11.inverse();
  const Eigen::VectorXd a = m0 - S0 * P01 * (c.phi_in.col(1) - m1);
  const Eigen::MatrixXd G = -S1 * P10;  // col1 | col0 has mean m1 + G (col0 - m0)
  GaussianMoments g;
  g.mean.resize(2 * K);
  g.mean << a, m1 + G * (a - m0);
  g.cov.resize(2 * K, 2 * K);
  g.cov.topLeftCorner(K, K) = S0;
  g.cov.topRightCorner(K, K) = S0 * G.transpose();
  g.cov.bottomLeftCorner(K, K) = G * S0;
  g.cov.bottomRightCorner(K, K) = S1 + G * S0 * G.transpose();
  return g;
}

struct OracleComparison {
  double max_mean_z = 0.0;
  double max_cov_z = 0.0;
  bool within(double k) const { return max_mean_z < k && max_cov_z < k; }
};

// z-scores of empirical means and covariances of `n` independent calls
// against the exact distribution; covariance standard errors use the
// Gaussian fourth-moment formula.
inline OracleComparison compare_with_oracle(const PhiOracleCase& c, int n, bool corrected, std::uint64_t seed) {
  const GaussianMoments ref = one_call_distribution(c);
  const int d = static_cast<int>(ref.mean.size());
  bvarsv::Rng rng(seed);
  Eigen::MatrixXd draws(n, d);
  for (int r = 0; r < n; ++r)
    draws.row(r) = bvarsv::draw_phi_triangular(c.Y, c.X, c.phi_in, c.factor, c.H, c.V, rng, corrected)
                       .reshaped()
                       .transpose();
  const Eigen::VectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centred = draws.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / (n - 1.0);
  OracleComparison out;
  for (int i = 0; i < d; ++i) {
    const double se = std::sqrt(ref.cov(i, i) / n);
    out.max_mean_z = std::max(out.max_mean_z, std::abs(mean(i) - ref.mean(i)) / se);
    for (int j = 0; j <= i; ++j) {
      const double se_c = std::sqrt((ref.cov(i, i) * ref.cov(j, j) + ref.cov(i, j) * ref.cov(i, j)) / n);
      out.max_cov_z = std::max(out.max_cov_z, std::abs(cov(i, j) - ref.cov(i, j)) / se_c);
    }
  }
  return out;
}

}  // namespace testutil
