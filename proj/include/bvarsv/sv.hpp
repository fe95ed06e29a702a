#pragma once

#include <Eigen/Dense>

#include "bvarsv/random.hpp"

namespace bvarsv {

struct SvParams {
  double mu = 0.0;
  double rho = 0.9;
  double sigma = 0.3;
};

/// Log-variances h_1..h_T and the initial state h_0.
struct SvPath {
  Eigen::VectorXd h;
  double h0 = 0.0;
};

/// mu ~ N(mu_mean, mu_sd^2), (rho + 1)/2 ~ Beta(rho_a, rho_b),
/// sigma^2 ~ G(1/2, 1/(2 B_sigma)).
struct SvPriors {
  double mu_mean = 0.0;
  double mu_sd = 100.0;
  double rho_a = 20.0;
  double rho_b = 1.5;
  double b_sigma = 1.0;
};

/// Inverse-gamma prior of the homoskedastic fallback.
struct HomoskedasticPrior {
  double shape = 0.01;
  double scale = 0.01;
};

struct SvOptions {
  bool interweave = true;
  bool homoskedastic = false;
  HomoskedasticPrior homo;
};

/// Counters accumulated over sweeps.
struct SvStats {
  long rho_proposals = 0;
  long rho_accepts = 0;
};

/// Prior-mean starting values; h is set to the log sample second moment.
void sv_init(const Eigen::VectorXd& xi, const SvPriors& priors, SvPath& path, SvParams& params);

/// One sweep for a single orthogonalised error series: mixture indicators,
/// joint draw of h_0..h_T, centred parameter updates and, when interweaving,
/// a non-centred redraw of (mu, sigma).
void sv_update(const Eigen::VectorXd& xi, SvPath& path, SvParams& params, const SvPriors& priors, Rng& rng,
               const SvOptions& options = {}, SvStats* stats = nullptr);

/// h_{T+s} = mu + rho (h_{T+s-1} - mu) + sigma eta, s = 1..horizon.
Eigen::VectorXd sv_forecast(double h_last, const SvParams& params, int horizon, Rng& rng);

/// Draw (params, path) of length T from the prior.
void sv_sample_prior(int T, const SvPriors& priors, SvPath& path, SvParams& params, Rng& rng);

/// Residuals whose log-squares follow the mixture approximation exactly,
/// log xi_t^2 = h_t + m_r + N(0, v_r). This is the observation model the
/// sampler targets; used by simulation-based correctness checks.
Eigen::VectorXd sv_mixture_residuals(const Eigen::VectorXd& h, Rng& rng);

/// Draw of h_0 from the stationary distribution N(mu, sigma^2 / (1 - rho^2)).
double sv_stationary_draw(const SvParams& params, Rng& rng);

}  // namespace bvarsv
