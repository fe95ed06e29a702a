#include "bvarsv/diagnostics.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "bvarsv/distributions.hpp"
#include "bvarsv/error.hpp"
#include "bvarsv/parallel.hpp"

namespace bvarsv {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct CsvFile {
  std::FILE* f;
  explicit CsvFile(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
    if (!f) throw DataError("cannot open " + path + " for writing");
  }
  ~CsvFile() { std::fclose(f); }
};

std::string group_label(int lag, CoefClass cls) {
  switch (cls) {
    case CoefClass::OwnLag: return "L" + std::to_string(lag) + ".own";
    case CoefClass::CrossLag: return "L" + std::to_string(lag) + ".cross";
    case CoefClass::Covariance: return "l";
    case CoefClass::Intercept: return "const";
  }
  return "?";
}

}  // namespace

double hoyer(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw DimensionError("hoyer: needs at least two entries");
  if (!x.allFinite()) throw DomainError("hoyer: non-finite entries");
  const double s = x.cwiseAbs().maxCoeff();
  if (s == 0.0) throw DomainError("hoyer: all entries are zero");
  const double l1 = x.cwiseAbs().sum() / s;
  const double l2 = (x / s).norm();
  const double rn = std::sqrt(static_cast<double>(n));
  return std::clamp((rn - l1 / l2) / (rn - 1.0), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

GroupIndex single_group(int n) {
  if (n < 1) throw DimensionError("single_group: n must be positive");
  GroupIndex g;
  g.group.assign(n, 0);
  g.cls.assign(n, CoefClass::OwnLag);
  g.lag.assign(n, 1);
  g.n_groups = 1;
  return g;
}

namespace {

std::unique_ptr<Prior> simulation_prior(const PriorConfig& cfg, int n) {
  PriorContext ctx;
  ctx.K = n;
  ctx.T = std::max(n, 3);
  ctx.hm_scale = Eigen::VectorXd::Ones(n);
  ctx.ssvs_sd = Eigen::VectorXd::Ones(n);
  return make_prior(cfg, single_group(n), ctx);
}

void draw_vector(Prior& prior, Eigen::Ref<Eigen::VectorXd> out, Rng& rng) {
  prior.sample_prior(rng);
  const Eigen::VectorXd v = prior.variances();
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = std::sqrt(v[j]) * rng.normal();
}

}  // namespace

Eigen::MatrixXd prior_simulate(const PriorConfig& cfg, int n, int draws, Rng& rng) {
  if (draws < 0) throw DimensionError("prior_simulate: negative draw count");
  auto prior = simulation_prior(cfg, n);
  Eigen::MatrixXd out(draws, n);
  Eigen::VectorXd row(n);
  for (int r = 0; r < draws; ++r) {
    draw_vector(*prior, row, rng);
    out.row(r) = row.transpose();
  }
  return out;
}

std::vector<double> prior_hoyer(const PriorConfig& cfg, int n, int sims, std::uint64_t seed, int threads) {
  if (sims < 1) throw DimensionError("prior_hoyer: sims must be positive");
  const auto proto = simulation_prior(cfg, n);
  std::vector<double> out(sims);
  parallel_for(sims, threads, [&](int i) {
    auto prior = proto->clone();
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXd x(n);
    draw_vector(*prior, x, rng);
    out[i] = hoyer(x);
  });
  return out;
}

std::vector<HoyerScenario> hoyer_scenarios() {
  std::vector<HoyerScenario> s;
  auto hm = [](double c) {
    PriorConfig p;
    p.family = PriorFamily::HM;
    p.hm.c1 = p.hm.d1 = p.hm.c2 = p.hm.d2 = c;
    return p;
  };
  auto ssvs = [](double tau0, double tau1) {
    PriorConfig p;
    p.family = PriorFamily::SSVS;
    p.ssvs.tau0 = tau0;
    p.ssvs.tau1 = tau1;
    p.ssvs.p = 0.5;
    return p;
  };
  auto dl = [](double a) {
    PriorConfig p;
    p.family = PriorFamily::DL;
    p.dl.a = a;
    return p;
  };
  // b only moves the global scale, which the Hoyer measure ignores.
  auto r2d2 = [](double a_pi, double b) {
    PriorConfig p;
    p.family = PriorFamily::R2D2;
    p.r2d2.a_pi = a_pi;
    p.r2d2.b = b;
    return p;
  };
  s.push_back({"A", "HM", hm(0.30), 0.21});
  s.push_back({"A", "SSVS", ssvs(0.1, 16.0), 0.45});
  s.push_back({"A", "DL", dl(0.51), 0.60});
  s.push_back({"A", "R2D2", r2d2(0.26, 0.5), 0.53});
  s.push_back({"B", "HM", hm(0.01), 0.21});
  s.push_back({"B", "SSVS", ssvs(0.1, 10.0), 0.44});
  s.push_back({"B", "DL", dl(0.001), 0.99});
  s.push_back({"B", "R2D2", r2d2(0.0005, 1.0), 0.98});
  return s;
}

// ---------------------------------------------------------------------------

double log_dl_marginal(double a, double phi) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("dl marginal: a must be positive");
  const double x = std::abs(phi);
  if (x == 0.0) {
    if (a <= 1.0) return kInf;
    return -std::log(4.0 * (a - 1.0));
  }
  return 0.5 * (a - 1.0) * std::log(x) + log_bessel_k(1.0 - a, std::sqrt(2.0 * x)) -
         0.5 * (1.0 + a) * std::log(2.0) - std::lgamma(a);
}

double log_hm_marginal(double c, double d, double phi) {
  if (!(c > 0.0 && d > 0.0) || !std::isfinite(c) || !std::isfinite(d))
    throw DomainError("hm marginal: c and d must be positive");
  const double x = std::abs(phi);
  const double nu = c - 0.5;
  if (x == 0.0) {
    if (c <= 0.5) return kInf;
    return 0.5 * std::log(d) + std::lgamma(nu) - std::lgamma(c) - kLogSqrt2Pi;
  }
  return nu * (std::log(x) - 0.5 * std::log(2.0 * d)) + c * std::log(d) + std::log(2.0) +
         log_bessel_k(nu, std::sqrt(2.0 * d) * x) - std::lgamma(c) - kLogSqrt2Pi;
}

double ssvs_marginal(double tau0, double tau1, double p, double phi) {
  if (!(tau0 > 0.0 && tau1 > 0.0)) throw DomainError("ssvs marginal: scales must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("ssvs marginal: p must lie in [0, 1]");
  auto npdf = [](double x, double s) { return std::exp(-0.5 * (x / s) * (x / s) - kLogSqrt2Pi) / s; };
  return (1.0 - p) * npdf(phi, tau0) + p * npdf(phi, tau1);
}

double log_r2d2_marginal(double a_pi, double b, double phi) {
  if (!(a_pi > 0.0 && b > 0.0) || !std::isfinite(a_pi) || !std::isfinite(b))
    throw DomainError("r2d2 marginal: a_pi and b must be positive");
  const double x = std::abs(phi);
  if (x == 0.0 && a_pi <= 0.5) return kInf;
  // zeta = e^u ~ BP(a_pi, b); phi | zeta is Laplace with variance zeta.
  const double log_beta = std::lgamma(a_pi) + std::lgamma(b) - std::lgamma(a_pi + b);
  auto log_f = [&](double u) {
    const double log_delta = 0.5 * (u - std::log(2.0));
    const double lap = -std::log(2.0) - log_delta - (x > 0.0 ? x * std::exp(-log_delta) : 0.0);
    const double log1p_eu = u > 30.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
    return lap + a_pi * u - (a_pi + b) * log1p_eu - log_beta;
  };
  const double centre = x > 0.0 ? 2.0 * std::log(x) : 0.0;
  double peak = centre, best = -kInf;
  for (double u = centre - 60.0; u <= centre + 200.0; u += 0.25) {
    const double v = log_f(u);
    if (v > best) {
      best = v;
      peak = u;
    }
  }
  if (!std::isfinite(best)) throw NumericalError("r2d2 marginal: integrand is not finite");
  auto f = [&](double u) { return std::exp(log_f(u) - best); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double left = GK::integrate(f, -kInf, peak, 20, 1e-12);
  const double right = GK::integrate(f, peak, kInf, 20, 1e-12);
  return best + std::log(left + right);
}

double log_marginal_density(const PriorConfig& cfg, double phi) {
  if (!std::isfinite(phi)) throw DomainError("marginal_density: non-finite argument");
  switch (cfg.family) {
    case PriorFamily::DL:
      if (!cfg.dl.a) throw ConfigError("dl.a", "marginal density needs a fixed a");
      return log_dl_marginal(*cfg.dl.a, phi);
    case PriorFamily::HM:
      return log_hm_marginal(cfg.hm.c1, cfg.hm.d1, phi);
    case PriorFamily::SSVS:
      if (!cfg.ssvs.tau0 || !cfg.ssvs.tau1) throw ConfigError("ssvs.tau0", "marginal density needs explicit scales");
      if (!cfg.ssvs.p) throw ConfigError("ssvs.p", "marginal density needs a fixed inclusion probability");
      return std::log(ssvs_marginal(*cfg.ssvs.tau0, *cfg.ssvs.tau1, *cfg.ssvs.p, phi));
    case PriorFamily::R2D2:
      if (!cfg.r2d2.a_pi) throw ConfigError("r2d2.a_pi", "marginal density needs a fixed a_pi");
      if (!cfg.r2d2.b) throw ConfigError("r2d2.b", "marginal density needs a fixed b");
      return log_r2d2_marginal(*cfg.r2d2.a_pi, *cfg.r2d2.b, phi);
    case PriorFamily::FLAT:
      if (!(cfg.flat_variance > 0.0)) throw ConfigError("flat_variance", "must be positive");
      return log_normal_pdf(phi, 0.0, cfg.flat_variance);
  }
  throw ConfigError("family", "unhandled prior family");
}

double marginal_density(const PriorConfig& cfg, double phi) { return std::exp(log_marginal_density(cfg, phi)); }

// ---------------------------------------------------------------------------

namespace {

void check_draws(const Eigen::MatrixXd& draws, const Eigen::VectorXd& truth, const char* who) {
  if (draws.rows() == 0) throw DimensionError(std::string(who) + ": no draws");
  if (draws.cols() != truth.size())
    throw DimensionError(std::string(who) + ": draws have " + std::to_string(draws.cols()) +
                         " columns, truth has " + std::to_string(truth.size()) + " entries");
}

}  // namespace

double mae(const Eigen::MatrixXd& draws, const Eigen::VectorXd& truth) {
  check_draws(draws, truth, "mae");
  const Eigen::VectorXd mean = draws.colwise().mean().transpose();
  return (mean - truth).cwiseAbs().mean();
}

double rmspd(const Eigen::MatrixXd& draws, const Eigen::VectorXd& truth) {
  check_draws(draws, truth, "rmspd");
  const double ss = (draws.rowwise() - truth.transpose()).squaredNorm();
  return std::sqrt(ss / static_cast<double>(draws.size()));
}

// ---------------------------------------------------------------------------

double excess_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() < 4) throw DimensionError("excess_kurtosis: needs at least four values");
  const double m = x.mean();
  const Eigen::ArrayXd c = x.array() - m;
  const double m2 = c.square().mean();
  if (!(m2 > 0.0)) throw DomainError("excess_kurtosis: zero variance");
  return c.square().square().mean() / (m2 * m2) - 3.0;
}

Eigen::VectorXd InducedPrior::column_pooled(int col) const {
  Eigen::VectorXd out(phi.rows() * M);
  for (int r = 0; r < M; ++r) out.segment(r * phi.rows(), phi.rows()) = element(r, col);
  return out;
}

InducedPrior induced_prior_experiment(int M, double variance, int draws, Rng& rng, int qq_points) {
  if (M < 2) throw DimensionError("induced_prior_experiment: M must be at least 2");
  if (!(variance > 0.0)) throw DomainError("induced_prior_experiment: variance must be positive");
  if (draws < 4 || qq_points < 1) throw DimensionError("induced_prior_experiment: too few draws");
  InducedPrior ip;
  ip.M = M;
  ip.variance = variance;
  ip.phi.resize(draws, M * M);
  const double sd = std::sqrt(variance);
  Eigen::MatrixXd B(M, M);
  CovFactor f = CovFactor::zeros(M);
  for (int r = 0; r < draws; ++r) {
    for (int j = 0; j < M; ++j)
      for (int i = 0; i < M; ++i) B(i, j) = sd * rng.normal();
    for (Eigen::Index k = 0; k < f.l.size(); ++k) f.l[k] = sd * rng.normal();
    const Eigen::MatrixXd phi = reduced_from_structural(B, f);
    ip.phi.row(r) = Eigen::Map<const Eigen::VectorXd>(phi.data(), M * M).transpose();
  }
  ip.excess_kurtosis.resize(M);
  ip.sample_variance.resize(M);
  for (int c = 0; c < M; ++c) {
    const Eigen::VectorXd x = ip.column_pooled(c);
    ip.excess_kurtosis[c] = excess_kurtosis(x);
    ip.sample_variance[c] = (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
  }
  const boost::math::normal_distribution<double> nd(0.0, sd);
  ip.qq_theoretical.resize(qq_points);
  ip.qq_sample.resize(qq_points, M);
  for (int q = 0; q < qq_points; ++q)
    ip.qq_theoretical[q] = boost::math::quantile(nd, (q + 0.5) / qq_points);
  for (int c = 0; c < M; ++c) {
    std::vector<double> v(ip.phi.col(c * M).data(), ip.phi.col(c * M).data() + draws);
    std::sort(v.begin(), v.end());
    for (int q = 0; q < qq_points; ++q) {
      const double h = (draws - 1) * (q + 0.5) / qq_points;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const std::size_t hi = std::min(lo + 1, v.size() - 1);
      ip.qq_sample(q, c) = v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    }
  }
  return ip;
}

double ks_normal_distance(Eigen::VectorXd x, double mean, double sd) {
  if (x.size() == 0) throw DimensionError("ks_normal_distance: empty sample");
  std::sort(x.data(), x.data() + x.size());
  const boost::math::normal_distribution<double> nd(mean, sd);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double F = boost::math::cdf(nd, x[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

double ks_pvalue(double distance, int n) {
  if (n < 1) throw DimensionError("ks_pvalue: n must be positive");
  const double rn = std::sqrt(static_cast<double>(n));
  const double t = (rn + 0.12 + 0.11 / rn) * distance;
  if (t < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    p += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

SparsitySummary posterior_hoyer(const Eigen::MatrixXd& coef_draws, const GroupIndex& groups) {
  if (coef_draws.rows() == 0) throw DimensionError("posterior_hoyer: no draws");
  if (coef_draws.cols() != groups.size()) throw DimensionError("posterior_hoyer: draws do not match the groups");
  SparsitySummary s;
  for (int g = 0; g < groups.n_groups; ++g) {
    const auto idx = groups.members(g);
    if (idx.size() < 2) continue;
    HoyerGroup hg;
    hg.lag = groups.lag[idx[0]];
    hg.cls = groups.cls[idx[0]];
    hg.label = group_label(hg.lag, hg.cls);
    hg.size = static_cast<int>(idx.size());
    Eigen::VectorXd x(hg.size);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < coef_draws.rows(); ++r) {
      for (int k = 0; k < hg.size; ++k) x[k] = coef_draws(r, idx[k]);
      if (x.cwiseAbs().maxCoeff() == 0.0) {
        ++hg.excluded;
        continue;
      }
      const double h = hoyer(x);
      hg.values.push_back(h);
      sum += h;
      ++hg.used;
    }
    hg.mean = hg.used > 0 ? sum / hg.used : std::numeric_limits<double>::quiet_NaN();
    s.groups.push_back(std::move(hg));
  }
  return s;
}

SparsitySummary posterior_hoyer(const PosteriorDraws& draws, const GroupIndex& groups) {
  return posterior_hoyer(draws.phi, groups);
}

// ---------------------------------------------------------------------------

void write_density_grid_csv(const std::vector<PriorConfig>& priors, const std::vector<std::string>& labels,
                            const std::vector<double>& grid, const std::string& path) {
  if (priors.size() != labels.size()) throw DimensionError("write_density_grid_csv: label count mismatch");
  CsvFile out(path);
  std::fprintf(out.f, "phi");
  for (const auto& l : labels) std::fprintf(out.f, ",%s", l.c_str());
  std::fprintf(out.f, "\n");
  for (double x : grid) {
    std::fprintf(out.f, "%.17g", x);
    for (const auto& p : priors) std::fprintf(out.f, ",%.17g", marginal_density(p, x));
    std::fprintf(out.f, "\n");
  }
}

void write_prior_hoyer_csv(const std::vector<HoyerScenario>& scen, const std::vector<std::vector<double>>& values,
                           int n, const std::string& path) {
  if (scen.size() != values.size()) throw DimensionError("write_prior_hoyer_csv: scenario count mismatch");
  CsvFile out(path);
  std::fprintf(out.f, "scenario,prior,sims,n,mean,sd,reference\n");
  for (std::size_t i = 0; i < scen.size(); ++i) {
    const auto& v = values[i];
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double h : v) ss += (h - m) * (h - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    std::fprintf(out.f, "%s,%s,%zu,%d,%.17g,%.17g,%.17g\n", scen[i].scenario.c_str(), scen[i].prior.c_str(), v.size(),
                 n, m, sd, scen[i].reference);
  }
}

void write_posterior_hoyer_csv(const SparsitySummary& s, const std::string& path) {
  CsvFile out(path);
  std::fprintf(out.f, "group,lag,class,size,mean,used,excluded\n");
  for (const auto& g : s.groups) {
    const char* cls = g.cls == CoefClass::OwnLag ? "own" : g.cls == CoefClass::CrossLag ? "cross" : "other";
    std::fprintf(out.f, "%s,%d,%s,%d,%.17g,%d,%d\n", g.label.c_str(), g.lag, cls, g.size, g.mean, g.used, g.excluded);
  }
}

void write_induced_prior_csv(const InducedPrior& ip, const std::string& kurtosis_path, const std::string& qq_path) {
  {
    CsvFile out(kurtosis_path);
    std::fprintf(out.f, "column,excess_kurtosis,variance\n");
    for (int c = 0; c < ip.M; ++c)
      std::fprintf(out.f, "%d,%.17g,%.17g\n", c + 1, ip.excess_kurtosis[c], ip.sample_variance[c]);
  }
  CsvFile out(qq_path);
  std::fprintf(out.f, "theoretical");
  for (int c = 0; c < ip.M; ++c) std::fprintf(out.f, ",phi_1%d", c + 1);
  std::fprintf(out.f, "\n");
  for (Eigen::Index q = 0; q < ip.qq_theoretical.size(); ++q) {
    std::fprintf(out.f, "%.17g", ip.qq_theoretical[q]);
    for (int c = 0; c < ip.M; ++c) std::fprintf(out.f, ",%.17g", ip.qq_sample(q, c));
    std::fprintf(out.f, "\n");
  }
}

}  // namespace bvarsv
