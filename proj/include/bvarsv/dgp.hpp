#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bvarsv/core_model.hpp"
#include "bvarsv/random.hpp"
#include "bvarsv/sampler.hpp"
#include "bvarsv/sv.hpp"

namespace bvarsv {

enum class DgpKind { Sparse, Dense };
std::string to_string(DgpKind k);
DgpKind dgp_kind_from_string(const std::string& s);

/// Nonzero coefficients are N(mu, sd^2); each is nonzero with the given
/// probability. The log-variances are AR(1) with mean sv_mu and persistence
/// and volatility drawn uniformly per series.
struct DgpScenario {
  DgpKind kind = DgpKind::Sparse;
  int M = 5;
  int T = 100;
  int p = 1;
  double own_prob = 0.8;
  double cross_prob = 0.1;
  double mu_own = 0.15, sd_own = 0.15;
  double mu_cross = 0.1, sd_cross = 0.1;
  double l_prob = 0.1;
  double mu_l = 0.001, sd_l = 0.001;
  double sv_mu = -10.0;
  double rho_lo = 0.85, rho_hi = 0.98;
  double sigma_lo = 0.1, sigma_hi = 0.3;
  int warmup = 100;
  int max_redraws = 10000;

  static DgpScenario sparse(int M, int T);
  static DgpScenario dense(int M, int T);
  std::string label() const;  // "sparse" / "dense"
  void validate() const;
};

struct DgpTruth {
  VarSpec spec;
  Eigen::MatrixXd phi;         // K x M
  CovFactor factor;
  std::vector<SvParams> sv;
  Eigen::MatrixXd H;           // T x M log-variances of the emitted rows
  int redraws = 0;             // rejected coefficient draws

  Eigen::VectorXd phi_vec() const { return Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size()); }
};

struct DgpSample {
  DgpTruth truth;
  Dataset data;
};

/// One coefficient draw before the stability check.
Eigen::MatrixXd draw_dgp_coefficients(const DgpScenario& s, Rng& rng);

/// Redraws the whole of Phi until the companion form has no eigenvalue of
/// modulus above one, then simulates T observations after a warm-up from a
/// zero state.
DgpSample generate_dgp(const DgpScenario& s, Rng& rng);

// ---------------------------------------------------------------------------
// Simulation study

struct StudyPrior {
  std::string name;
  PriorConfig phi;
};

/// The eleven coefficient priors of the comparison: DL, DL_h, DL*, HM,
/// SSVS_bl, SSVS, SSVS_h, SSVS*, R2D2, R2D2_h, R2D2*. `with_flat` appends FLAT.
std::vector<StudyPrior> study_priors(bool with_flat = false);
/// Look up one of study_priors(true) by name.
StudyPrior study_prior(const std::string& name);

struct SimStudyConfig {
  std::vector<DgpScenario> scenarios;
  std::vector<StudyPrior> priors;
  int replications = 20;
  McmcConfig mcmc{2000, 1000, 1, 42};
  PriorConfig l_prior;        // shared by every model; R2D2 by default
  bool intercept = false;
  std::uint64_t seed = 42;
  int threads = 0;
};

struct StudyCell {
  std::string scenario;
  int M = 0, T = 0;
  std::string prior;
  std::vector<double> mae, rmspd;    // per successful replication
  double median_mae = 0.0, median_rmspd = 0.0;  // NaN when every replication failed
  std::vector<std::string> errors;   // "rep <r>: <message>"
};

/// Replication r of scenario s draws its data from derive_seed(seed, s * R + r);
/// every prior sees the same data. Failures are recorded per cell.
std::vector<StudyCell> run_sim_study(const SimStudyConfig& cfg);

double median(std::vector<double> v);

/// Long format: scenario,M,T,prior,median_mae,median_rmspd,replications,failed
void write_sim_study_csv(const std::vector<StudyCell>& cells, const std::string& path);
/// Wide layout with one row per (M, prior) and columns
/// MAE.<scenario>.T<T> followed by RMSPD.<scenario>.T<T>.
void write_sim_study_table_csv(const std::vector<StudyCell>& cells, const std::string& path);
/// Truth and data as CSV: data rows `t,<series>`; truth `parameter,value`
/// using the summary parameter names.
void write_dgp_csv(const DgpSample& s, const std::string& data_path, const std::string& truth_path);

}  // namespace bvarsv
