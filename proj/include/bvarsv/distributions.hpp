#pragma once

#include <Eigen/Dense>
#include <span>

#include "bvarsv/random.hpp"

namespace bvarsv {

/// Generalised inverse Gaussian GIG(theta, psi, chi), density proportional to
/// x^(theta-1) exp(-(psi x + chi / x) / 2).
struct GigParams {
  double theta;
  double psi;
  double chi;

  bool valid() const;
};

/// One GIG draw (Hoermann & Leydold 2014: ratio-of-uniforms with and without
/// mode shift plus the concave-hat rejection sampler for small omega).
/// Throws DomainError for parameters outside the valid region.
double sample_gig(const GigParams& params, Rng& rng);

/// Inverse Gaussian IG(mean, shape), drawn as GIG(-1/2, shape/mean^2, shape).
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

/// log K_nu(x), modified Bessel function of the second kind. Finite for all
/// x > 0 where K_nu itself would over- or underflow.
double log_bessel_k(double nu, double x);
/// K_nu(x). Throws DomainError for x <= 0.
double bessel_k(double nu, double x);

/// Symmetric Dirichlet(a, ..., a) of dimension k. Components are built from
/// log-scale gamma draws so that tiny a never yields an all-zero vector.
Eigen::VectorXd sample_dirichlet_symmetric(double a, int k, Rng& rng);

/// Index drawn with probability proportional to exp(log_weights).
/// Throws DomainError if no weight is finite.
int sample_discrete(std::span<const double> log_weights, Rng& rng);

/// log(sum(exp(v))) without overflow.
double log_sum_exp(std::span<const double> v);

// Log densities used by discrete hyperparameter conditionals and tests.
double log_gamma_pdf(double x, double shape, double rate);
double log_beta_pdf(double x, double a, double b);
double log_normal_pdf(double x, double mean, double var);
/// Symmetric Dirichlet log density, evaluated from log(theta).
double log_dirichlet_symmetric_pdf(std::span<const double> log_theta, double a);

}  // namespace bvarsv
