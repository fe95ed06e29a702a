#include "bvarsv/sv.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "bvarsv/distributions.hpp"
#include "bvarsv/error.hpp"

namespace bvarsv {

namespace {

// Ten-component normal mixture approximation of log chi^2_1.
constexpr std::array<double, 10> kMixProb = {0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
                                             0.18842, 0.12047, 0.05591, 0.01575, 0.00115};
constexpr std::array<double, 10> kMixMean = {1.92677, 1.34744, 0.73504, 0.02266, -0.85173,
                                             -1.97278, -3.46788, -5.55246, -8.68384, -14.65};
constexpr std::array<double, 10> kMixVar = {0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
                                            0.98583, 1.57469, 2.54498, 4.16591, 7.33342};

Eigen::VectorXd log_squares(const Eigen::VectorXd& xi) {
  Eigen::VectorXd y(xi.size());
  for (Eigen::Index t = 0; t < xi.size(); ++t)
    y[t] = std::log(std::max(xi[t] * xi[t], std::numeric_limits<double>::min()));
  return y;
}

std::vector<int> draw_indicators(const Eigen::VectorXd& ystar, const Eigen::VectorXd& h, Rng& rng) {
  std::vector<int> r(ystar.size());
  std::array<double, 10> lw;
  for (Eigen::Index t = 0; t < ystar.size(); ++t) {
    const double e = ystar[t] - h[t];
    for (int k = 0; k < 10; ++k) {
      const double d = e - kMixMean[k];
      lw[k] = std::log(kMixProb[k]) - 0.5 * std::log(kMixVar[k]) - 0.5 * d * d / kMixVar[k];
    }
    r[t] = sample_discrete(lw, rng);
  }
  return r;
}

// Draw x ~ N(Omega^{-1} b, Omega^{-1}) for symmetric tridiagonal Omega with
// diagonal d and off-diagonal e.
Eigen::VectorXd draw_tridiagonal(const Eigen::VectorXd& d, const Eigen::VectorXd& e, const Eigen::VectorXd& b,
                                 Rng& rng) {
  const Eigen::Index n = d.size();
  Eigen::VectorXd c(n), off(n > 1 ? n - 1 : 0);
  // Omega = C C' with C lower bidiagonal (diag c, subdiag off).
  c[0] = std::sqrt(d[0]);
  for (Eigen::Index i = 1; i < n; ++i) {
    off[i - 1] = e[i - 1] / c[i - 1];
    const double v = d[i] - off[i - 1] * off[i - 1];
    if (!(v > 0.0)) throw NumericalError("sv_update: state precision not positive definite");
    c[i] = std::sqrt(v);
  }
  // Solve C w = b, then C' x = w + z.
  Eigen::VectorXd w(n);
  w[0] = b[0] / c[0];
  for (Eigen::Index i = 1; i < n; ++i) w[i] = (b[i] - off[i - 1] * w[i - 1]) / c[i];
  for (Eigen::Index i = 0; i < n; ++i) w[i] += rng.normal();
  Eigen::VectorXd x(n);
  x[n - 1] = w[n - 1] / c[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = (w[i] - off[i] * x[i + 1]) / c[i];
  return x;
}

double log_rho_prior(double rho, const SvPriors& p) {
  const double u = 0.5 * (rho + 1.0);
  return (p.rho_a - 1.0) * std::log(u) + (p.rho_b - 1.0) * std::log1p(-u);
}

// log N(h0; mu, sigma^2 / (1 - rho^2)) up to terms free of rho.
double log_h0_term(double rho, double dev0, double sigma) {
  const double one_m = 1.0 - rho * rho;
  return 0.5 * std::log(one_m) - 0.5 * one_m * dev0 * dev0 / (sigma * sigma);
}

void update_centered(const Eigen::VectorXd& hall, SvParams& par, const SvPriors& pri, Rng& rng, SvStats* stats) {
  const Eigen::Index T = hall.size() - 1;
  const double h0 = hall[0];
  // rho: independence MH with the regression proposal.
  {
    double sxx = 0.0, sxy = 0.0;
    for (Eigen::Index t = 1; t <= T; ++t) {
      const double x = hall[t - 1] - par.mu;
      sxx += x * x;
      sxy += x * (hall[t] - par.mu);
    }
    const double prop_mean = sxy / sxx;
    const double prop_sd = par.sigma / std::sqrt(sxx);
    const double cand = rng.normal(prop_mean, prop_sd);
    if (stats) ++stats->rho_proposals;
    if (std::abs(cand) < 1.0) {
      const double dev0 = h0 - par.mu;
      const double log_ratio = log_rho_prior(cand, pri) + log_h0_term(cand, dev0, par.sigma) -
                               log_rho_prior(par.rho, pri) - log_h0_term(par.rho, dev0, par.sigma);
      if (std::log(rng.uniform()) < log_ratio) {
        par.rho = cand;
        if (stats) ++stats->rho_accepts;
      }
    }
  }
  // mu: conjugate normal.
  {
    const double s2 = par.sigma * par.sigma;
    const double one_m = 1.0 - par.rho;
    double prec = (1.0 - par.rho * par.rho) / s2 + T * one_m * one_m / s2 + 1.0 / (pri.mu_sd * pri.mu_sd);
    double lin = (1.0 - par.rho * par.rho) * h0 / s2 + pri.mu_mean / (pri.mu_sd * pri.mu_sd);
    for (Eigen::Index t = 1; t <= T; ++t) lin += one_m * (hall[t] - par.rho * hall[t - 1]) / s2;
    par.mu = rng.normal(lin / prec, 1.0 / std::sqrt(prec));
  }
  // sigma^2: GIG.
  {
    const double dev0 = h0 - par.mu;
    double S = (1.0 - par.rho * par.rho) * dev0 * dev0;
    for (Eigen::Index t = 1; t <= T; ++t) {
      const double e = hall[t] - par.mu - par.rho * (hall[t - 1] - par.mu);
      S += e * e;
    }
    const double s2 = sample_gig({0.5 - 0.5 * (T + 1), 1.0 / pri.b_sigma, S}, rng);
    par.sigma = std::sqrt(s2);
  }
}

}  // namespace

void sv_init(const Eigen::VectorXd& xi, const SvPriors& priors, SvPath& path, SvParams& params) {
  if (xi.size() == 0) throw DimensionError("sv_init: empty residual series");
  const double m2 = std::max(xi.squaredNorm() / xi.size(), 1e-300);
  params.mu = std::log(m2);
  params.rho = 2.0 * priors.rho_a / (priors.rho_a + priors.rho_b) - 1.0;
  params.sigma = std::sqrt(2.0 * priors.b_sigma / std::numbers::pi);
  path.h = Eigen::VectorXd::Constant(xi.size(), params.mu);
  path.h0 = params.mu;
}

void sv_update(const Eigen::VectorXd& xi, SvPath& path, SvParams& par, const SvPriors& pri, Rng& rng,
               const SvOptions& opt, SvStats* stats) {
  const Eigen::Index T = xi.size();
  if (T == 0) throw DimensionError("sv_update: empty residual series");
  if (path.h.size() != T) throw DimensionError("sv_update: path length does not match residuals");
  if (!xi.allFinite()) throw DomainError("sv_update: non-finite residuals");

  if (opt.homoskedastic) {
    const double shape = opt.homo.shape + 0.5 * T;
    const double scale = opt.homo.scale + 0.5 * xi.squaredNorm();
    const double var = 1.0 / rng.gamma(shape, scale);
    par.mu = std::log(var);
    par.rho = 0.0;
    par.sigma = 0.0;
    path.h.setConstant(par.mu);
    path.h0 = par.mu;
    return;
  }

  const Eigen::VectorXd ystar = log_squares(xi);
  const std::vector<int> r = draw_indicators(ystar, path.h, rng);

  // Joint draw of (h_0, ..., h_T) in the centred parameterisation.
  const double s2 = par.sigma * par.sigma;
  Eigen::VectorXd d(T + 1), e(T), b(T + 1);
  for (Eigen::Index i = 0; i <= T; ++i) d[i] = (i == 0 || i == T ? 1.0 : 1.0 + par.rho * par.rho) / s2;
  e.setConstant(-par.rho / s2);
  // Omega * (mu 1): row sums of the prior precision times mu.
  for (Eigen::Index i = 0; i <= T; ++i) {
    double rs = d[i];
    if (i > 0) rs += e[i - 1];
    if (i < T) rs += e[i];
    b[i] = rs * par.mu;
  }
  for (Eigen::Index t = 1; t <= T; ++t) {
    const int k = r[t - 1];
    d[t] += 1.0 / kMixVar[k];
    b[t] += (ystar[t - 1] - kMixMean[k]) / kMixVar[k];
  }
  Eigen::VectorXd hall = draw_tridiagonal(d, e, b, rng);

  update_centered(hall, par, pri, rng, stats);

  if (opt.interweave) {
    // Non-centred step: ystar_t - m_r = mu + sigma htilde_t + N(0, v_r).
    const Eigen::VectorXd ht = (hall.array() - par.mu) / par.sigma;
    Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
    Eigen::Vector2d lin = Eigen::Vector2d::Zero();
    P(0, 0) = 1.0 / (pri.mu_sd * pri.mu_sd);
    P(1, 1) = 1.0 / pri.b_sigma;
    lin[0] = pri.mu_mean / (pri.mu_sd * pri.mu_sd);
    for (Eigen::Index t = 1; t <= T; ++t) {
      const int k = r[t - 1];
      const double w = 1.0 / kMixVar[k];
      const double y = ystar[t - 1] - kMixMean[k];
      P(0, 0) += w;
      P(0, 1) += w * ht[t];
      P(1, 1) += w * ht[t] * ht[t];
      lin[0] += w * y;
      lin[1] += w * ht[t] * y;
    }
    P(1, 0) = P(0, 1);
    Eigen::LLT<Eigen::Matrix2d> llt(P);
    if (llt.info() != Eigen::Success) throw NumericalError("sv_update: non-centred precision not positive definite");
    const Eigen::Vector2d mean = llt.solve(lin);
    const Eigen::Vector2d z(rng.normal(), rng.normal());
    const Eigen::Vector2d draw = mean + llt.matrixU().solve(z);
    par.mu = draw[0];
    hall = par.mu + draw[1] * ht.array();
    par.sigma = std::abs(draw[1]);
  }

  path.h0 = hall[0];
  path.h = hall.tail(T);
}

Eigen::VectorXd sv_forecast(double h_last, const SvParams& par, int horizon, Rng& rng) {
  if (horizon < 1) throw DomainError("sv_forecast: horizon must be >= 1");
  Eigen::VectorXd out(horizon);
  double h = h_last;
  for (int s = 0; s < horizon; ++s) {
    h = par.mu + par.rho * (h - par.mu) + (par.sigma > 0.0 ? par.sigma * rng.normal() : 0.0);
    out[s] = h;
  }
  return out;
}

Eigen::VectorXd sv_mixture_residuals(const Eigen::VectorXd& h, Rng& rng) {
  Eigen::VectorXd xi(h.size());
  for (Eigen::Index t = 0; t < h.size(); ++t) {
    double u = rng.uniform();
    int k = 0;
    while (k < 9 && u > kMixProb[k]) u -= kMixProb[k++];
    const double ystar = h[t] + kMixMean[k] + std::sqrt(kMixVar[k]) * rng.normal();
    xi[t] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::exp(0.5 * ystar);
  }
  return xi;
}

double sv_stationary_draw(const SvParams& par, Rng& rng) {
  return rng.normal(par.mu, par.sigma / std::sqrt(1.0 - par.rho * par.rho));
}

void sv_sample_prior(int T, const SvPriors& pri, SvPath& path, SvParams& par, Rng& rng) {
  par.mu = rng.normal(pri.mu_mean, pri.mu_sd);
  par.rho = 2.0 * rng.beta(pri.rho_a, pri.rho_b) - 1.0;
  par.sigma = std::sqrt(rng.gamma(0.5, 0.5 / pri.b_sigma));
  path.h0 = sv_stationary_draw(par, rng);
  path.h.resize(T);
  double prev = path.h0;
  for (int t = 0; t < T; ++t) {
    prev = par.mu + par.rho * (prev - par.mu) + par.sigma * rng.normal();
    path.h[t] = prev;
  }
}

}  // namespace bvarsv
