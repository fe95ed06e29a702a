#pragma once

// Independent simulation of univariate marginal priors through their scale
// mixtures, using std:: distributions rather than the library's streams,
// and a cdf built by integrating the library density.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "bvarsv/diagnostics.hpp"
#include "stat_helpers.hpp"

namespace testutil {

// phi | s ~ Laplace with scale s.
inline double laplace(std::mt19937_64& g, double s) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution sign(0.5);
  return (sign(g) ? 1.0 : -1.0) * s * e(g);
}

// s ~ G(a, rate 1/2), phi ~ Laplace(s).
inline std::vector<double> dl_mixture_draws(double a, int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::gamma_distribution<double> gam(a, 2.0);
  std::vector<double> x(n);
  for (double& v : x) v = laplace(g, gam(g));
  return x;
}

// lambda ~ G(c, rate d), phi ~ N(0, lambda).
inline std::vector<double> hm_mixture_draws(double c, double d, int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::gamma_distribution<double> gam(c, 1.0 / d);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (double& v : x) v = std::sqrt(gam(g)) * z(g);
  return x;
}

// zeta ~ BP(a_pi, b) as a ratio of gammas, phi ~ Laplace with variance zeta.
inline std::vector<double> r2d2_mixture_draws(double a_pi, double b, int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::gamma_distribution<double> ga(a_pi, 1.0), gb(b, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = laplace(g, std::sqrt(ga(g) / gb(g) / 2.0));
  return x;
}

// p(e^v) e^v, zero where e^v leaves the positive normal range.
inline double log_scale_integrand(const std::function<double(double)>& density, double v) {
  const double x = std::exp(v);
  if (!(x >= std::numeric_limits<double>::min()) || !std::isfinite(x)) return 0.0;
  return density(x) * x;
}

// Mass of a density on (0, t], integrated over log|phi| so that a
// singularity at the origin is harmless.
inline double mass_below(const std::function<double(double)>& density, double t) {
  auto g = [&](double v) { return log_scale_integrand(density, v); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g, -std::numeric_limits<double>::infinity(), std::log(t), 15, 1e-11);
}

// KS distance between the sample and the cdf of `density` (symmetric about
// zero), evaluated at `levels` order statistics. The true sup distance is at
// most the returned value plus 1/levels.
inline double ks_grid_distance(std::vector<double> x, const std::function<double(double)>& density, int levels) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  double d = 0.0;
  for (int k = 0; k < levels; ++k) {
    const auto i = std::min(n - 1, static_cast<std::size_t>((k + 0.5) * n / levels));
    const double t = std::abs(x[i]);
    const double m = t > 0.0 ? mass_below(density, t) : 0.0;
    const double F = x[i] < 0.0 ? 0.5 - m : 0.5 + m;
    d = std::max({d, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  return d;
}

// Total mass of a symmetric density on the real line.
inline double total_mass(const std::function<double(double)>& density) {
  auto g = [&](double v) { return log_scale_integrand(density, v); };
  const double inf = std::numeric_limits<double>::infinity();
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return 2.0 * (GK::integrate(g, -inf, 0.0, 15, 1e-11) + GK::integrate(g, 0.0, inf, 15, 1e-11));
}

}  // namespace testutil
