#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace bvarsv {

/// Model dimensions of a VAR(p) with M series.
struct VarSpec {
  int M = 1;
  int p = 1;
  bool intercept = false;

  VarSpec() = default;
  VarSpec(int m, int lags, bool with_intercept);

  /// Regressors per equation: M*p, plus one when an intercept is included.
  int K() const { return M * p + (intercept ? 1 : 0); }
  /// Number of coefficients in vec(Phi).
  int n() const { return K() * M; }
  /// Number of free elements of the unitriangular covariance factor.
  int n_l() const { return M * (M - 1) / 2; }
};

enum class Transform { LogDifference, Level };

/// Observed (already transformed) data. Rows are periods, columns series.
struct Dataset {
  Eigen::MatrixXd Y;
  std::vector<std::string> names;
  std::vector<std::string> dates;
  std::vector<Transform> transforms;

  int T() const { return static_cast<int>(Y.rows()); }
  int M() const { return static_cast<int>(Y.cols()); }

  /// Rows [first, last] inclusive, metadata sliced accordingly.
  Dataset slice(int first, int last) const;
  /// Subset of series by column index.
  Dataset select(const std::vector<int>& columns) const;
  void validate() const;
};

/// Builds default metadata (names y1.., dates t1.., Level transforms).
Dataset make_dataset(Eigen::MatrixXd Y);

/// Design matrices of the stacked VAR, Y = X * Phi + E.
/// Row t of X is (y'_{t-1}, ..., y'_{t-p}[, 1]) for t = p .. T-1.
struct Design {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;
};

Design build_design(const Dataset& data, const VarSpec& spec);
Design build_design(const Eigen::MatrixXd& Y, const VarSpec& spec);

/// Regressor vector for predicting the period after the last row of Y.
Eigen::VectorXd next_regressor(const Eigen::MatrixXd& Y, const VarSpec& spec);

/// Group label of row `row` of the K x M coefficient matrix.
struct CoefPosition {
  int lag;        // 1-based lag, 0 for the intercept row
  int variable;   // lagged variable, -1 for the intercept row
  int equation;   // column of Phi
  bool own() const { return lag > 0 && variable == equation; }
  bool intercept() const { return lag == 0; }
};
CoefPosition coef_position(const VarSpec& spec, int row, int column);

/// Companion matrix (Mp x Mp) of the lag coefficients of Phi. The intercept
/// row, if present, is ignored.
Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& phi, const VarSpec& spec);

/// Largest eigenvalue modulus of the companion matrix.
/// Throws NumericalError if the eigen solver does not converge.
double spectral_radius(const Eigen::MatrixXd& phi, const VarSpec& spec);

/// Stability check. By default a root of modulus exactly one is accepted
/// (rejection only for modulus greater than one); `strict` requires the
/// spectral radius to be below 1 - 1e-8.
bool companion_stable(const Eigen::MatrixXd& phi, const VarSpec& spec, bool strict = false);

/// The unitriangular covariance factor.
///
/// The orthogonalised errors are xi_t = A * eps_t with A unit lower
/// triangular, so that xi_{i} = eps_{i} + sum_{k<i} A(i,k) eps_{k}. The
/// upper unitriangular L with xi'_t = eps'_t L is A transposed, giving
/// Sigma_t = L'^{-1} D_t L^{-1}. The free elements are stored equation by
/// equation: l = (A(1,0), A(2,0), A(2,1), A(3,0), ...), i.e. column i of L
/// holds entries (L(0,i), ..., L(i-1,i)).
struct CovFactor {
  Eigen::VectorXd l;

  CovFactor() = default;
  explicit CovFactor(Eigen::VectorXd values) : l(std::move(values)) {}
  static CovFactor zeros(int M);

  /// Offset of the first free element belonging to equation i (i >= 1).
  static int offset(int i) { return i * (i - 1) / 2; }

  int M() const;
  /// Unit lower triangular A (xi = A eps).
  Eigen::MatrixXd A(int M) const;
  /// Upper unitriangular L = A'.
  Eigen::MatrixXd L(int M) const { return A(M).transpose(); }
};

/// Sigma = A^{-1} diag(d) A^{-T} for the factor and variances d.
Eigen::MatrixXd covariance(const CovFactor& factor, const Eigen::VectorXd& d);

/// Reduced-form coefficients Phi = B L^{-1} from structural B = Phi L.
Eigen::MatrixXd reduced_from_structural(const Eigen::MatrixXd& B, const CovFactor& factor);

/// The inverse map, B = Phi L.
Eigen::MatrixXd structural_from_reduced(const Eigen::MatrixXd& phi, const CovFactor& factor);

}  // namespace bvarsv
