#include "bvarsv/core_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "bvarsv/error.hpp"

namespace bvarsv {

VarSpec::VarSpec(int m, int lags, bool with_intercept) : M(m), p(lags), intercept(with_intercept) {
  if (M < 1) throw DimensionError("VarSpec: M must be >= 1");
  if (p < 1) throw DimensionError("VarSpec: p must be >= 1");
}

Dataset Dataset::slice(int first, int last) const {
  if (first < 0 || last >= T() || first > last) throw DimensionError("Dataset::slice: bad row range");
  Dataset out;
  out.Y = Y.middleRows(first, last - first + 1);
  out.names = names;
  out.transforms = transforms;
  if (!dates.empty()) out.dates.assign(dates.begin() + first, dates.begin() + last + 1);
  return out;
}

Dataset Dataset::select(const std::vector<int>& columns) const {
  Dataset out;
  out.Y.resize(Y.rows(), static_cast<Eigen::Index>(columns.size()));
  out.dates = dates;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const int j = columns[c];
    if (j < 0 || j >= M()) throw DimensionError("Dataset::select: column index out of range");
    out.Y.col(static_cast<Eigen::Index>(c)) = Y.col(j);
    if (!names.empty()) out.names.push_back(names[static_cast<std::size_t>(j)]);
    if (!transforms.empty()) out.transforms.push_back(transforms[static_cast<std::size_t>(j)]);
  }
  return out;
}

void Dataset::validate() const {
  if (Y.rows() == 0 || Y.cols() == 0) throw DimensionError("Dataset: empty data matrix");
  if (!names.empty() && static_cast<int>(names.size()) != M())
    throw DimensionError("Dataset: names do not match the number of series");
  if (!dates.empty() && static_cast<int>(dates.size()) != T())
    throw DimensionError("Dataset: dates do not match the number of periods");
  if (!transforms.empty() && static_cast<int>(transforms.size()) != M())
    throw DimensionError("Dataset: transforms do not match the number of series");
  if (!Y.allFinite()) throw DataError("Dataset: non-finite values in data matrix");
}

Dataset make_dataset(Eigen::MatrixXd Y) {
  Dataset d;
  d.Y = std::move(Y);
  for (int j = 0; j < d.M(); ++j) {
    d.names.push_back("y" + std::to_string(j + 1));
    d.transforms.push_back(Transform::Level);
  }
  for (int t = 0; t < d.T(); ++t) d.dates.push_back("t" + std::to_string(t + 1));
  return d;
}

Design build_design(const Eigen::MatrixXd& Y, const VarSpec& spec) {
  if (Y.cols() != spec.M) throw DimensionError("build_design: data has " + std::to_string(Y.cols()) +
                                               " series, spec expects " + std::to_string(spec.M));
  const int T = static_cast<int>(Y.rows());
  if (T <= spec.p) throw DimensionError("build_design: need more than p observations");
  if (!Y.allFinite()) throw DataError("build_design: non-finite values in data");
  const int rows = T - spec.p;
  Design d;
  d.X.resize(rows, spec.K());
  d.Y = Y.bottomRows(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = r + spec.p;
    for (int lag = 1; lag <= spec.p; ++lag)
      d.X.block(r, (lag - 1) * spec.M, 1, spec.M) = Y.row(t - lag);
    if (spec.intercept) d.X(r, spec.K() - 1) = 1.0;
  }
  return d;
}

Design build_design(const Dataset& data, const VarSpec& spec) { return build_design(data.Y, spec); }

Eigen::VectorXd next_regressor(const Eigen::MatrixXd& Y, const VarSpec& spec) {
  const int T = static_cast<int>(Y.rows());
  if (T < spec.p) throw DimensionError("next_regressor: fewer than p observations");
  Eigen::VectorXd x(spec.K());
  for (int lag = 1; lag <= spec.p; ++lag) x.segment((lag - 1) * spec.M, spec.M) = Y.row(T - lag).transpose();
  if (spec.intercept) x(spec.K() - 1) = 1.0;
  return x;
}

CoefPosition coef_position(const VarSpec& spec, int row, int column) {
  if (spec.intercept && row == spec.K() - 1) return {0, -1, column};
  return {row / spec.M + 1, row % spec.M, column};
}

Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& phi, const VarSpec& spec) {
  const int M = spec.M;
  const int Mp = M * spec.p;
  if (phi.rows() < Mp || phi.cols() != M) throw DimensionError("companion_matrix: Phi has wrong shape");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Mp, Mp);
  // y_t = sum_j A_j' y_{t-j}; top block row holds A_1' ... A_p'.
  for (int lag = 0; lag < spec.p; ++lag) C.block(0, lag * M, M, M) = phi.block(lag * M, 0, M, M).transpose();
  if (spec.p > 1) C.block(M, 0, Mp - M, Mp - M).setIdentity();
  return C;
}

double spectral_radius(const Eigen::MatrixXd& phi, const VarSpec& spec) {
  const Eigen::MatrixXd C = companion_matrix(phi, spec);
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  if (es.info() != Eigen::Success) throw NumericalError("companion_stable: eigen solver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool companion_stable(const Eigen::MatrixXd& phi, const VarSpec& spec, bool strict) {
  const double r = spectral_radius(phi, spec);
  return strict ? r < 1.0 - 1e-8 : r <= 1.0;
}

CovFactor CovFactor::zeros(int M) { return CovFactor(Eigen::VectorXd::Zero(M * (M - 1) / 2)); }

int CovFactor::M() const {
  const auto n = l.size();
  int m = 1;
  while (m * (m - 1) / 2 < n) ++m;
  if (m * (m - 1) / 2 != n) throw DimensionError("CovFactor: length is not triangular");
  return m;
}

Eigen::MatrixXd CovFactor::A(int M) const {
  if (l.size() != M * (M - 1) / 2) throw DimensionError("CovFactor: length does not match M");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(M, M);
  for (int i = 1; i < M; ++i)
    for (int k = 0; k < i; ++k) a(i, k) = l(offset(i) + k);
  return a;
}

Eigen::MatrixXd covariance(const CovFactor& factor, const Eigen::VectorXd& d) {
  const int M = static_cast<int>(d.size());
  const Eigen::MatrixXd A = factor.A(M);
  const Eigen::MatrixXd Ainv =
      A.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd::Identity(M, M));
  Eigen::MatrixXd S = Ainv * d.asDiagonal() * Ainv.transpose();
  return 0.5 * (S + S.transpose());
}

Eigen::MatrixXd reduced_from_structural(const Eigen::MatrixXd& B, const CovFactor& factor) {
  const int M = static_cast<int>(B.cols());
  const Eigen::MatrixXd L = factor.L(M);
  // Phi L = B  <=>  L' Phi' = B'
  return L.transpose().triangularView<Eigen::UnitLower>().solve(B.transpose()).transpose();
}

Eigen::MatrixXd structural_from_reduced(const Eigen::MatrixXd& phi, const CovFactor& factor) {
  return phi * factor.L(static_cast<int>(phi.cols()));
}

}  // namespace bvarsv
