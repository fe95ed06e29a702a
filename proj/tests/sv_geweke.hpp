#pragma once

// Getting-it-right for the SV block alone: residuals follow the mixture
// model given h, so the comparison exercises the mixture sampler exactly.

#include <string>
#include <vector>

#include "bvarsv/sv.hpp"
#include "geweke.hpp"

namespace testutil {

inline GewekeReport run_sv_geweke(int N = 100000, std::uint64_t seed = 9) {
  using namespace bvarsv;
  // A tighter mu prior keeps exp(h) within floating-point range during the
  // successive-conditional run.
  SvPriors pri;
  pri.mu_sd = 1.0;
  const int T = 20;
  const std::vector<std::string> names = {"mu", "rho", "sigma", "h0", "h1", "h5", "h10", "h15", "h20",
                                          "mu^2", "rho^2", "sigma^2", "h0^2", "h10^2", "h20^2", "mu*rho",
                                          "rho*sigma", "h10*h20", "mean h", "mean h^2"};
  auto stats = [&](const SvPath& p, const SvParams& q) {
    const double mh = p.h.mean();
    const double mh2 = p.h.squaredNorm() / T;
    return std::vector<double>{q.mu, q.rho, q.sigma, p.h0, p.h[0], p.h[4], p.h[9], p.h[14], p.h[19],
                               q.mu * q.mu, q.rho * q.rho, q.sigma * q.sigma, p.h0 * p.h0, p.h[9] * p.h[9],
                               p.h[19] * p.h[19], q.mu * q.rho, q.rho * q.sigma, p.h[9] * p.h[19], mh, mh2};
  };
  Rng rng(seed);
  std::vector<std::vector<double>> marginal, successive;
  SvPath path;
  SvParams par;
  for (int i = 0; i < N; ++i) {
    sv_sample_prior(T, pri, path, par, rng);
    marginal.push_back(stats(path, par));
  }
  sv_sample_prior(T, pri, path, par, rng);
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd xi = sv_mixture_residuals(path.h, rng);
    sv_update(xi, path, par, pri, rng);
    successive.push_back(stats(path, par));
  }
  return geweke_compare(names, marginal, successive);
}

}  // namespace testutil
