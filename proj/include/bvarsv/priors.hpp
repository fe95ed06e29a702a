#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bvarsv/core_model.hpp"
#include "bvarsv/random.hpp"

namespace bvarsv {

enum class PriorFamily { R2D2, DL, SSVS, HM, FLAT };
enum class Grouping { Global, SemiGlobal };
enum class CoefClass { OwnLag, CrossLag, Covariance, Intercept };

std::string to_string(PriorFamily f);
PriorFamily prior_family_from_string(const std::string& s);
std::string to_string(Grouping g);
Grouping grouping_from_string(const std::string& s);

/// Group membership of every element of a coefficient vector. For Phi the
/// vector is vec(Phi), element j = column * K + row. Intercepts carry group -1.
struct GroupIndex {
  std::vector<int> group;
  std::vector<CoefClass> cls;
  std::vector<int> lag;  // 1-based, 0 for intercept and covariance elements
  int n_groups = 0;

  int size() const { return static_cast<int>(group.size()); }
  std::vector<int> members(int g) const;
  std::vector<int> group_sizes() const;
};

/// Global: all lag coefficients form one group. SemiGlobal: one group per
/// (lag, own/cross) pair that has members.
GroupIndex phi_groups(const VarSpec& spec, Grouping grouping);
/// The free elements of the covariance factor, always a single group.
GroupIndex l_groups(int M);

struct R2d2Config {
  std::optional<double> b;  // fixed b; otherwise a discrete uniform hyperprior
  double b_lo = 0.01;
  double b_hi = 1.0;
  int b_points = 100;
  std::optional<double> a_pi;  // overrides the consistency rule
};

struct DlConfig {
  std::optional<double> a;  // fixed a; otherwise a discrete uniform hyperprior
  bool a_is_inverse_K = false;  // fixed a = 1/K, resolved at construction
  int a_points = 1000;
};

struct SsvsConfig {
  double c0 = 0.01;
  double c1 = 100.0;
  std::optional<double> p;  // fixed inclusion probability; otherwise Beta(s1, s2)
  double s1 = 1.0;
  double s2 = 1.0;
  // Explicit scales; when absent the semiautomatic scales are used.
  std::optional<double> tau0;
  std::optional<double> tau1;
};

struct HmConfig {
  double c1 = 0.01, d1 = 0.01;  // own-lag (or the single group for l)
  double c2 = 0.01, d2 = 0.01;  // cross-lag
  bool ratio_of_variances = true;  // sigma_i / sigma_j as variances, else sds
};

struct PriorConfig {
  PriorFamily family = PriorFamily::R2D2;
  Grouping grouping = Grouping::Global;
  R2d2Config r2d2;
  DlConfig dl;
  SsvsConfig ssvs;
  HmConfig hm;
  double flat_variance = 10.0;
  double intercept_variance = 100.0;
};

/// Data-dependent constants a prior needs at construction.
struct PriorContext {
  int T = 100;                   // estimation-window length for the R2D2 rule
  int K = 1;                     // regressors per equation (DL a = 1/K)
  Eigen::VectorXd hm_scale;      // r-tilde per element (HM)
  Eigen::VectorXd ssvs_sd;       // sqrt of var-hat per element (SSVS)
};

/// Floor applied to |beta| before hyperparameter updates.
inline constexpr double kBetaFloor = 1e-150;
/// Floor applied to prior variances handed to the Gaussian draws.
inline constexpr double kVarianceFloor = 1e-150;

// ---------------------------------------------------------------------------
// Family states and their updates.

struct R2d2State {
  Eigen::VectorXd psi;
  Eigen::VectorXd theta;     // simplex within each group
  Eigen::VectorXd zeta;      // per group
  Eigen::VectorXd xi;        // per group
  Eigen::VectorXd b;         // per group
  Eigen::VectorXd a_pi;      // per group
  std::vector<double> b_grid;  // single point when b is fixed
  std::optional<double> a_pi_fixed;
  int T = 100;
};

/// a_pi = 1 / (n^(b/2) T^(b/2) log T).
double r2d2_api_rule(int n_group, int T, double b);
R2d2State r2d2_init(const GroupIndex& groups, const R2d2Config& cfg, int T);
void r2d2_update(R2d2State& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng);
/// Marginal-conditional draw of the whole hierarchy.
void r2d2_sample_prior(R2d2State& s, const GroupIndex& groups, Rng& rng);

struct DlState {
  Eigen::VectorXd psi;
  Eigen::VectorXd theta;
  Eigen::VectorXd zeta;   // per group
  Eigen::VectorXd a;      // per group
  std::vector<std::vector<double>> a_grid;  // per group; single point when fixed
};

DlState dl_init(const GroupIndex& groups, const DlConfig& cfg, int K);
void dl_update(DlState& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng);
void dl_sample_prior(DlState& s, const GroupIndex& groups, Rng& rng);

struct SsvsState {
  std::vector<int> gamma;
  Eigen::VectorXd tau0;
  Eigen::VectorXd tau1;
  Eigen::VectorXd p;  // per group
  bool learn_p = false;
  double s1 = 1.0, s2 = 1.0;
};

SsvsState ssvs_init(const GroupIndex& groups, const SsvsConfig& cfg, const Eigen::VectorXd& sd);
/// Posterior inclusion probability of one coefficient.
double ssvs_inclusion_probability(double beta, double tau0, double tau1, double p);
void ssvs_update(SsvsState& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng);
void ssvs_sample_prior(SsvsState& s, const GroupIndex& groups, Rng& rng);

struct HmState {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double c1 = 0.01, d1 = 0.01, c2 = 0.01, d2 = 0.01;
  Eigen::VectorXd scale;  // r-tilde per element
};

HmState hm_init(const HmConfig& cfg, const Eigen::VectorXd& scale);
void hm_update(HmState& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng);
void hm_sample_prior(HmState& s, Rng& rng);

/// Prior variances per element.
Eigen::VectorXd prior_variances(const R2d2State& s, const GroupIndex& groups);
Eigen::VectorXd prior_variances(const DlState& s, const GroupIndex& groups);
Eigen::VectorXd prior_variances(const SsvsState& s, const GroupIndex& groups);
Eigen::VectorXd prior_variances(const HmState& s, const GroupIndex& groups);

// ---------------------------------------------------------------------------
// Data-dependent constants.

/// Residual variance of an OLS AR(6) with intercept, per series.
Eigen::VectorXd hm_scale_constants(const Eigen::MatrixXd& Y);
/// r-tilde for every element of vec(Phi); intercepts get 1 (unused).
Eigen::VectorXd hm_phi_scales(const VarSpec& spec, const Eigen::VectorXd& sigma_hat, bool ratio_of_variances);

/// Posterior variances of vec(Phi) under a conjugate normal-Wishart prior with
/// V0 = 10 I, S0 = 0 and M + 2 degrees of freedom.
Eigen::VectorXd normal_wishart_variances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);
/// The same for the free elements of the covariance factor: equation-i
/// residuals regressed on residuals of equations 0..i-1.
Eigen::VectorXd normal_wishart_l_variances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

struct SsvsScales {
  Eigen::VectorXd tau0;
  Eigen::VectorXd tau1;
};
SsvsScales ssvs_semiautomatic_scales(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double c0, double c1);

// ---------------------------------------------------------------------------
// Type-erased prior used by the sampler.

class Prior {
 public:
  virtual ~Prior() = default;
  virtual PriorFamily family() const = 0;
  /// Prior variances, intercept elements included.
  virtual Eigen::VectorXd variances() const = 0;
  virtual void update(const Eigen::VectorXd& beta, Rng& rng) = 0;
  /// Replace the hyperparameters by a draw from their prior.
  virtual void sample_prior(Rng& rng) = 0;
  virtual std::vector<std::string> hyper_names() const = 0;
  virtual Eigen::VectorXd hyper_values() const = 0;
  virtual std::unique_ptr<Prior> clone() const = 0;

  const GroupIndex& groups() const { return groups_; }

 protected:
  explicit Prior(GroupIndex g) : groups_(std::move(g)) {}
  GroupIndex groups_;
};

std::unique_ptr<Prior> make_prior(const PriorConfig& cfg, const GroupIndex& groups, const PriorContext& ctx);

/// Context for the prior on vec(Phi) from a design.
PriorContext phi_prior_context(const Design& design, const VarSpec& spec, const PriorConfig& cfg);
/// Context for the prior on l.
PriorContext l_prior_context(const Design& design, const PriorConfig& cfg);

}  // namespace bvarsv
