#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bvarsv/core_model.hpp"
#include "bvarsv/priors.hpp"
#include "bvarsv/random.hpp"
#include "bvarsv/sv.hpp"

namespace bvarsv {

struct McmcConfig {
  int draws = 10000;
  int burnin = 5000;
  int thin = 10;
  std::uint64_t seed = 42;

  int retained() const { return draws / thin; }
  void validate() const;
};

struct SamplerConfig {
  PriorConfig phi_prior;
  PriorConfig l_prior;
  SvPriors sv_priors;
  SvOptions sv_options;
  bool corrected = true;  // false only to demonstrate the uncorrected draw
};

/// Retained draws, one row per draw.
struct PosteriorDraws {
  VarSpec spec;
  std::vector<std::string> names;     // series names
  Eigen::MatrixXd phi;                // retained x n, vec(Phi) column-major
  Eigen::MatrixXd l;                  // retained x M(M-1)/2
  Eigen::MatrixXd sv;                 // retained x 3M: (mu, rho, sigma) per series
  Eigen::MatrixXd h_last;             // retained x M
  Eigen::MatrixXd hyper;              // retained x hyper_names.size()
  std::vector<std::string> hyper_names;
  long rho_proposals = 0;
  long rho_accepts = 0;

  int size() const { return static_cast<int>(phi.rows()); }
  Eigen::MatrixXd phi_matrix(int draw) const;
  CovFactor factor(int draw) const;
  SvParams sv_params(int draw, int series) const;
};

/// Draws every column of Phi from its full conditional, in order. With
/// `corrected` every equation j >= i whose orthogonalised error involves
/// column i contributes to the conditional of column i; without it only
/// equation i does (the uncorrected variant, kept for testing).
/// H is T x M log-variances, V is K x M prior variances.
Eigen::MatrixXd draw_phi_triangular(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X, const Eigen::MatrixXd& phi,
                                    const CovFactor& factor, const Eigen::MatrixXd& H, const Eigen::MatrixXd& V,
                                    Rng& rng, bool corrected = true);

/// Draws the free elements of the covariance factor equation by equation
/// from weighted regressions of residuals on preceding residuals.
/// E is T x M reduced-form residuals, V holds prior variances of l.
CovFactor draw_l(const Eigen::MatrixXd& E, const Eigen::MatrixXd& H, const Eigen::VectorXd& V, Rng& rng);

/// Current values of all unknowns.
struct ChainState {
  Eigen::MatrixXd phi;
  CovFactor factor;
  std::vector<SvPath> paths;
  std::vector<SvParams> sv;

  Eigen::MatrixXd H() const;
};

/// Gibbs sampler for a fixed design. The response can be replaced between
/// sweeps, which the simulation-based correctness checks rely on.
class GibbsSampler {
 public:
  GibbsSampler(const Design& design, const VarSpec& spec, const SamplerConfig& cfg);
  GibbsSampler(const GibbsSampler& other);

  void sweep(Rng& rng);

  const ChainState& state() const { return state_; }
  ChainState& state() { return state_; }
  Prior& phi_prior() { return *phi_prior_; }
  Prior& l_prior() { return *l_prior_; }
  const Prior& phi_prior() const { return *phi_prior_; }
  const Prior& l_prior() const { return *l_prior_; }
  const Design& design() const { return design_; }
  const VarSpec& spec() const { return spec_; }
  const SvStats& sv_stats() const { return sv_stats_; }

  void set_response(const Eigen::MatrixXd& Y);
  long iteration() const { return iteration_; }

  std::vector<std::string> hyper_names() const;
  Eigen::VectorXd hyper_values() const;

 private:
  Design design_;
  VarSpec spec_;
  SamplerConfig cfg_;
  std::unique_ptr<Prior> phi_prior_;
  std::unique_ptr<Prior> l_prior_;
  ChainState state_;
  SvStats sv_stats_;
  long iteration_ = 0;
};

/// Full estimation run: burn-in, thinning, seed from `mcmc.seed`.
PosteriorDraws run_mcmc(const Dataset& data, const VarSpec& spec, const SamplerConfig& cfg, const McmcConfig& mcmc);

/// Flat binary container: magic "BVSVDRW1", u32 version, i32 header
/// (retained, M, p, intercept, n_hyper), length-prefixed series and hyper
/// names, then little-endian f64 values draw by draw: phi, l, sv, h_last, hyper.
void write_draws(const PosteriorDraws& d, const std::string& path);
PosteriorDraws read_draws(const std::string& path);

/// Names used in summaries, in vec(Phi) and l storage order:
/// phi.<equation>.<variable>.L<lag>, phi.<equation>.const, l.<i>.<k>.
std::vector<std::string> phi_parameter_names(const VarSpec& spec, const std::vector<std::string>& names);
std::vector<std::string> l_parameter_names(int M, const std::vector<std::string>& names);

/// One row per parameter: mean, sd, median and the 5/25/75/95% quantiles,
/// written with 17 significant digits.
struct SummaryRow {
  std::string parameter;
  double mean, sd, q05, q25, median, q75, q95;
};
std::vector<SummaryRow> summarize(const PosteriorDraws& d);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

}  // namespace bvarsv
