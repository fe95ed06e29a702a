#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bvarsv/priors.hpp"
#include "bvarsv/random.hpp"
#include "bvarsv/sampler.hpp"

namespace bvarsv {

/// Hoyer sparseness of x: 0 when all |x_i| are equal, 1 for a one-hot vector.
/// Needs at least two entries, not all zero.
double hoyer(const Eigen::Ref<const Eigen::VectorXd>& x);

// ---------------------------------------------------------------------------
// Prior simulation

/// A single group of n own-lag coefficients with unit HM scales.
GroupIndex single_group(int n);

/// draws x n coefficient vectors sampled through the whole hierarchy of the
/// configured prior, hyperpriors included.
Eigen::MatrixXd prior_simulate(const PriorConfig& cfg, int n, int draws, Rng& rng);

/// Hoyer measure of `sims` prior vectors of length n, without storing the
/// vectors. Simulation i uses the stream derive_seed(seed, i).
std::vector<double> prior_hoyer(const PriorConfig& cfg, int n, int sims, std::uint64_t seed, int threads = 1);

struct HoyerScenario {
  std::string scenario;  // "A" or "B"
  std::string prior;     // HM, SSVS, DL, R2D2
  PriorConfig cfg;
  double reference;      // published mean
};

/// The eight prior settings of the sparseness comparison: A with every prior
/// calibrated to an interquartile range of 0.5, B with more mass near zero.
std::vector<HoyerScenario> hoyer_scenarios();

// ---------------------------------------------------------------------------
// Univariate marginal prior densities

/// Marginal density of a single coefficient. Reads the fixed hyperparameters
/// of the family: dl.a; hm.c1 and hm.d1; ssvs.tau0, ssvs.tau1 and ssvs.p;
/// r2d2.a_pi and r2d2.b. FLAT is N(0, flat_variance).
double marginal_density(const PriorConfig& cfg, double phi);
double log_marginal_density(const PriorConfig& cfg, double phi);

/// Closed forms, exposed for testing.
double log_dl_marginal(double a, double phi);
double log_hm_marginal(double c, double d, double phi);
double ssvs_marginal(double tau0, double tau1, double p, double phi);
/// One-dimensional quadrature over the beta-prime global scale after the
/// exponential and gamma layers are integrated out analytically.
double log_r2d2_marginal(double a_pi, double b, double phi);

// ---------------------------------------------------------------------------
// Estimation accuracy

/// Mean absolute error of the posterior mean. Rows of `draws` are draws.
double mae(const Eigen::MatrixXd& draws, const Eigen::VectorXd& truth);
/// Root mean squared distance of every draw from the truth.
double rmspd(const Eigen::MatrixXd& draws, const Eigen::VectorXd& truth);

// ---------------------------------------------------------------------------
// Induced reduced-form prior

struct InducedPrior {
  int M = 0;
  double variance = 0.0;
  Eigen::MatrixXd phi;                // draws x M*M, vec(Phi) column-major
  Eigen::VectorXd excess_kurtosis;    // per column of Phi, rows pooled
  Eigen::VectorXd sample_variance;    // per column of Phi, rows pooled
  Eigen::VectorXd qq_theoretical;     // N(0, variance) quantiles
  Eigen::MatrixXd qq_sample;          // one column per column of Phi (row 1)

  /// Draws of Phi(row, col), zero-based.
  Eigen::VectorXd element(int row, int col) const { return phi.col(col * M + row); }
  /// All rows of one column of Phi stacked.
  Eigen::VectorXd column_pooled(int col) const;
};

/// B (M x M) and l drawn i.i.d. N(0, variance), mapped to Phi = B L^{-1}.
InducedPrior induced_prior_experiment(int M, double variance, int draws, Rng& rng, int qq_points = 99);

double excess_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Kolmogorov-Smirnov distance of the sample against a normal cdf.
double ks_normal_distance(Eigen::VectorXd x, double mean, double sd);
/// Asymptotic p-value of a KS distance from n observations.
double ks_pvalue(double distance, int n);

// ---------------------------------------------------------------------------
// Posterior sparseness

struct HoyerGroup {
  std::string label;  // e.g. "L1.own", "L2.cross", "l"
  int lag = 0;
  CoefClass cls = CoefClass::OwnLag;
  int size = 0;
  double mean = 0.0;     // NaN when no draw was usable
  int used = 0;
  int excluded = 0;      // draws where the group was all zero
  std::vector<double> values;
};

struct SparsitySummary {
  std::vector<HoyerGroup> groups;  // groups with fewer than two members are omitted
};

/// Hoyer measure per draw and group of vec(Phi), averaged over draws.
SparsitySummary posterior_hoyer(const PosteriorDraws& draws, const GroupIndex& groups);
SparsitySummary posterior_hoyer(const Eigen::MatrixXd& coef_draws, const GroupIndex& groups);

// ---------------------------------------------------------------------------
// CSV output

/// Density grid with header `phi,<label>...`.
void write_density_grid_csv(const std::vector<PriorConfig>& priors, const std::vector<std::string>& labels,
                            const std::vector<double>& grid, const std::string& path);
/// scenario,prior,sims,n,mean,sd,reference
void write_prior_hoyer_csv(const std::vector<HoyerScenario>& scen, const std::vector<std::vector<double>>& values,
                           int n, const std::string& path);
/// group,lag,class,size,mean,used,excluded
void write_posterior_hoyer_csv(const SparsitySummary& s, const std::string& path);
/// Kurtosis table `column,excess_kurtosis,variance` and QQ table
/// `theoretical,phi_11,...` for row 1 of Phi.
void write_induced_prior_csv(const InducedPrior& ip, const std::string& kurtosis_path, const std::string& qq_path);

}  // namespace bvarsv
