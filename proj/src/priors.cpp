#include "bvarsv/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bvarsv/distributions.hpp"
#include "bvarsv/error.hpp"

namespace bvarsv {

std::string to_string(PriorFamily f) {
  switch (f) {
    case PriorFamily::R2D2: return "R2D2";
    case PriorFamily::DL: return "DL";
    case PriorFamily::SSVS: return "SSVS";
    case PriorFamily::HM: return "HM";
    case PriorFamily::FLAT: return "FLAT";
  }
  return "?";
}

PriorFamily prior_family_from_string(const std::string& s) {
  if (s == "R2D2" || s == "r2d2") return PriorFamily::R2D2;
  if (s == "DL" || s == "dl") return PriorFamily::DL;
  if (s == "SSVS" || s == "ssvs") return PriorFamily::SSVS;
  if (s == "HM" || s == "hm") return PriorFamily::HM;
  if (s == "FLAT" || s == "flat") return PriorFamily::FLAT;
  throw ConfigError("family", "unknown prior family '" + s + "'");
}

std::string to_string(Grouping g) { return g == Grouping::Global ? "global" : "semi-global"; }

Grouping grouping_from_string(const std::string& s) {
  if (s == "global") return Grouping::Global;
  if (s == "semi-global" || s == "semi-global-local") return Grouping::SemiGlobal;
  throw ConfigError("grouping", "unknown grouping '" + s + "'");
}

std::vector<int> GroupIndex::members(int g) const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (group[j] == g) out.push_back(j);
  return out;
}

std::vector<int> GroupIndex::group_sizes() const {
  std::vector<int> n(n_groups, 0);
  for (int g : group)
    if (g >= 0) ++n[g];
  return n;
}

GroupIndex phi_groups(const VarSpec& spec, Grouping grouping) {
  const int K = spec.K();
  GroupIndex gi;
  gi.group.resize(spec.n());
  gi.cls.resize(spec.n());
  gi.lag.resize(spec.n());
  // Raw id (lag - 1) * 2 + (own ? 0 : 1), compacted afterwards.
  std::vector<int> raw(spec.n());
  for (int col = 0; col < spec.M; ++col) {
    for (int row = 0; row < K; ++row) {
      const int j = col * K + row;
      const CoefPosition pos = coef_position(spec, row, col);
      if (pos.intercept()) {
        gi.cls[j] = CoefClass::Intercept;
        gi.lag[j] = 0;
        raw[j] = -1;
        continue;
      }
      gi.cls[j] = pos.own() ? CoefClass::OwnLag : CoefClass::CrossLag;
      gi.lag[j] = pos.lag;
      raw[j] = grouping == Grouping::Global ? 0 : (pos.lag - 1) * 2 + (pos.own() ? 0 : 1);
    }
  }
  std::vector<int> remap(2 * spec.p, -1);
  int next = 0;
  for (int id = 0; id < 2 * spec.p; ++id) {
    if (std::find(raw.begin(), raw.end(), id) != raw.end()) remap[id] = next++;
  }
  for (int j = 0; j < spec.n(); ++j) gi.group[j] = raw[j] < 0 ? -1 : remap[raw[j]];
  gi.n_groups = next;
  return gi;
}

GroupIndex l_groups(int M) {
  GroupIndex gi;
  const int n = M * (M - 1) / 2;
  gi.group.assign(n, 0);
  gi.cls.assign(n, CoefClass::Covariance);
  gi.lag.assign(n, 0);
  gi.n_groups = n > 0 ? 1 : 0;
  return gi;
}

namespace {

double clamp_abs(double b) { return std::max(std::abs(b), kBetaFloor); }

void check_size(const Eigen::VectorXd& beta, const GroupIndex& groups, const char* who) {
  if (beta.size() != groups.size())
    throw DimensionError(std::string(who) + ": coefficient vector has length " + std::to_string(beta.size()) +
                         ", groups expect " + std::to_string(groups.size()));
  if (!beta.allFinite()) throw DomainError(std::string(who) + ": non-finite coefficients");
}

// Dirichlet log density of the members' theta values.
double log_dirichlet_members(const Eigen::VectorXd& theta, const std::vector<int>& idx, double a) {
  std::vector<double> lt(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) lt[k] = std::log(theta[idx[k]]);
  return log_dirichlet_symmetric_pdf(lt, a);
}

// Draws T_j from the given GIG parameters and sets theta = T / sum T, returning sum T.
template <class DrawT>
double draw_simplex_via_t(Eigen::VectorXd& theta, const std::vector<int>& idx, DrawT draw_t) {
  std::vector<double> t(idx.size());
  double total = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    t[k] = draw_t(idx[k]);
    total += t[k];
  }
  for (std::size_t k = 0; k < idx.size(); ++k)
    theta[idx[k]] = std::max(t[k] / total, std::numeric_limits<double>::min());
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// R2D2

double r2d2_api_rule(int n_group, int T, double b) {
  if (T < 2) throw DomainError("r2d2: the a_pi rule needs T >= 2");
  return 1.0 / (std::pow(static_cast<double>(n_group), b / 2.0) * std::pow(static_cast<double>(T), b / 2.0) *
                std::log(static_cast<double>(T)));
}

namespace {

// Gamma draws with shape near 0.01 underflow; xi enters later draws as a rate.
constexpr double kXiFloor = std::numeric_limits<double>::min();

double r2d2_api(const R2d2State& s, int n_group, double b) {
  return s.a_pi_fixed ? *s.a_pi_fixed : r2d2_api_rule(n_group, s.T, b);
}

}  // namespace

R2d2State r2d2_init(const GroupIndex& groups, const R2d2Config& cfg, int T) {
  R2d2State s;
  s.T = T;
  s.a_pi_fixed = cfg.a_pi;
  if (cfg.b) {
    s.b_grid = {*cfg.b};
  } else {
    if (cfg.b_points < 1 || !(cfg.b_lo > 0.0) || cfg.b_hi < cfg.b_lo) throw ConfigError("r2d2.b_grid", "invalid grid");
    for (int k = 0; k < cfg.b_points; ++k)
      s.b_grid.push_back(cfg.b_points == 1 ? cfg.b_lo
                                           : cfg.b_lo + (cfg.b_hi - cfg.b_lo) * k / (cfg.b_points - 1.0));
  }
  const int n = groups.size();
  const int G = groups.n_groups;
  const auto sizes = groups.group_sizes();
  s.psi = Eigen::VectorXd::Constant(n, 2.0);
  s.theta = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < n; ++j)
    if (groups.group[j] >= 0) s.theta[j] = 1.0 / sizes[groups.group[j]];
  s.zeta = Eigen::VectorXd::Ones(G);
  s.xi = Eigen::VectorXd::Ones(G);
  s.b.resize(G);
  s.a_pi.resize(G);
  const double b0 = s.b_grid[(s.b_grid.size() - 1) / 2];
  for (int g = 0; g < G; ++g) {
    s.b[g] = b0;
    s.a_pi[g] = r2d2_api(s, sizes[g], b0);
  }
  return s;
}

void r2d2_update(R2d2State& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng) {
  check_size(beta, groups, "r2d2_update");
  for (int g = 0; g < groups.n_groups; ++g) {
    const auto idx = groups.members(g);
    const double ng = static_cast<double>(idx.size());
    const double a = ng * s.a_pi[g];

    // (1) local scales psi
    for (int j : idx) {
      const double mean = std::sqrt(s.theta[j] * s.zeta[g] / 2.0) / clamp_abs(beta[j]);
      s.psi[j] = 1.0 / sample_inverse_gaussian(mean, 1.0, rng);
    }
    // (2) global scale zeta
    double chi = 0.0;
    for (int j : idx) chi += 2.0 * beta[j] * beta[j] / (s.psi[j] * s.theta[j]);
    chi = std::max(chi, 2.0 * ng * kBetaFloor * kBetaFloor);
    s.zeta[g] = sample_gig({a - ng / 2.0, 2.0 * s.xi[g], chi}, rng);
    // (3) xi
    s.xi[g] = std::max(rng.gamma(a + s.b[g], 1.0 + s.zeta[g]), kXiFloor);
    // (4) (theta, zeta) jointly through T_j ~ GIG; zeta = sum T_j.
    s.zeta[g] = draw_simplex_via_t(s.theta, idx, [&](int j) {
      const double bj = clamp_abs(beta[j]);
      return sample_gig({s.a_pi[g] - 0.5, 2.0 * s.xi[g], 2.0 * bj * bj / s.psi[j]}, rng);
    });
    // (5) b on its grid
    if (s.b_grid.size() > 1) {
      std::vector<double> lw(s.b_grid.size());
      for (std::size_t k = 0; k < s.b_grid.size(); ++k) {
        const double api = r2d2_api(s, static_cast<int>(idx.size()), s.b_grid[k]);
        lw[k] = log_dirichlet_members(s.theta, idx, api) + log_gamma_pdf(s.zeta[g], ng * api, s.xi[g]) +
                log_gamma_pdf(s.xi[g], s.b_grid[k], 1.0);
      }
      s.b[g] = s.b_grid[sample_discrete(lw, rng)];
    }
    s.a_pi[g] = r2d2_api(s, static_cast<int>(idx.size()), s.b[g]);
  }
}

void r2d2_sample_prior(R2d2State& s, const GroupIndex& groups, Rng& rng) {
  for (int g = 0; g < groups.n_groups; ++g) {
    const auto idx = groups.members(g);
    const double ng = static_cast<double>(idx.size());
    s.b[g] = s.b_grid.size() > 1 ? s.b_grid[rng.next_u64() % s.b_grid.size()] : s.b_grid[0];
    s.a_pi[g] = r2d2_api(s, static_cast<int>(idx.size()), s.b[g]);
    s.xi[g] = std::max(rng.gamma(s.b[g], 1.0), kXiFloor);
    s.zeta[g] = draw_simplex_via_t(s.theta, idx, [&](int) { return rng.gamma(s.a_pi[g], s.xi[g]); });
    (void)ng;
    for (int j : idx) s.psi[j] = rng.exponential(0.5);
  }
}

Eigen::VectorXd prior_variances(const R2d2State& s, const GroupIndex& groups) {
  Eigen::VectorXd v(groups.size());
  for (int j = 0; j < groups.size(); ++j) {
    const int g = groups.group[j];
    v[j] = g < 0 ? 0.0 : s.psi[j] * s.theta[j] * s.zeta[g] / 2.0;
  }
  return v;
}

// ---------------------------------------------------------------------------
// DL

DlState dl_init(const GroupIndex& groups, const DlConfig& cfg, int K) {
  DlState s;
  const int n = groups.size();
  const int G = groups.n_groups;
  const auto sizes = groups.group_sizes();
  s.psi = Eigen::VectorXd::Constant(n, 2.0);
  s.theta = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < n; ++j)
    if (groups.group[j] >= 0) s.theta[j] = 1.0 / sizes[groups.group[j]];
  s.zeta.resize(G);
  s.a.resize(G);
  s.a_grid.resize(G);
  for (int g = 0; g < G; ++g) {
    if (cfg.a_is_inverse_K) {
      s.a_grid[g] = {1.0 / K};
    } else if (cfg.a) {
      if (!(*cfg.a > 0.0)) throw ConfigError("dl.a", "must be positive");
      s.a_grid[g] = {*cfg.a};
    } else {
      // Support [1/n_g, 1/2]; groups of one or two collapse to the upper end.
      const double lo = std::min(1.0 / sizes[g], 0.5);
      const int pts = cfg.a_points;
      for (int k = 0; k < pts; ++k) s.a_grid[g].push_back(pts == 1 ? lo : lo + (0.5 - lo) * k / (pts - 1.0));
    }
    s.a[g] = s.a_grid[g][(s.a_grid[g].size() - 1) / 2];
    s.zeta[g] = 2.0 * sizes[g] * s.a[g];
  }
  return s;
}

void dl_update(DlState& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng) {
  check_size(beta, groups, "dl_update");
  for (int g = 0; g < groups.n_groups; ++g) {
    const auto idx = groups.members(g);
    const double ng = static_cast<double>(idx.size());
    const double a = s.a[g];
    // (theta, zeta) with psi integrated out: T_j ~ GIG(a - 1, 1, 2|beta_j|).
    s.zeta[g] = draw_simplex_via_t(s.theta, idx, [&](int j) {
      return sample_gig({a - 1.0, 1.0, 2.0 * clamp_abs(beta[j])}, rng);
    });
    // zeta given theta, psi integrated out.
    double chi = 0.0;
    for (int j : idx) chi += 2.0 * clamp_abs(beta[j]) / s.theta[j];
    s.zeta[g] = sample_gig({ng * (a - 1.0), 1.0, chi}, rng);
    // psi given everything.
    for (int j : idx) {
      const double mean = s.theta[j] * s.zeta[g] / clamp_abs(beta[j]);
      s.psi[j] = 1.0 / sample_inverse_gaussian(mean, 1.0, rng);
    }
    const auto& grid = s.a_grid[g];
    if (grid.size() > 1) {
      // Dir(theta; a) G(zeta; n a, 1/2) with the shared lgamma(n a) cancelled.
      double sum_log_theta = 0.0;
      for (int j : idx) sum_log_theta += std::log(s.theta[j]);
      const double log_half_zeta = std::log(0.5 * s.zeta[g]);
      std::vector<double> lw(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k)
        lw[k] = -ng * std::lgamma(grid[k]) + (grid[k] - 1.0) * sum_log_theta + ng * grid[k] * log_half_zeta;
      s.a[g] = grid[sample_discrete(lw, rng)];
    }
  }
}

void dl_sample_prior(DlState& s, const GroupIndex& groups, Rng& rng) {
  for (int g = 0; g < groups.n_groups; ++g) {
    const auto idx = groups.members(g);
    const auto& grid = s.a_grid[g];
    s.a[g] = grid.size() > 1 ? grid[rng.next_u64() % grid.size()] : grid[0];
    s.zeta[g] = draw_simplex_via_t(s.theta, idx, [&](int) { return rng.gamma(s.a[g], 0.5); });
    for (int j : idx) s.psi[j] = rng.exponential(0.5);
  }
}

Eigen::VectorXd prior_variances(const DlState& s, const GroupIndex& groups) {
  Eigen::VectorXd v(groups.size());
  for (int j = 0; j < groups.size(); ++j) {
    const int g = groups.group[j];
    const double tz = g < 0 ? 0.0 : s.theta[j] * s.zeta[g];
    v[j] = g < 0 ? 0.0 : s.psi[j] * tz * tz;
  }
  return v;
}

// ---------------------------------------------------------------------------
// SSVS

SsvsState ssvs_init(const GroupIndex& groups, const SsvsConfig& cfg, const Eigen::VectorXd& sd) {
  const int n = groups.size();
  SsvsState s;
  s.tau0.resize(n);
  s.tau1.resize(n);
  for (int j = 0; j < n; ++j) {
    const double scale = sd.size() == n ? sd[j] : 1.0;
    s.tau0[j] = cfg.tau0 ? *cfg.tau0 : cfg.c0 * scale;
    s.tau1[j] = cfg.tau1 ? *cfg.tau1 : cfg.c1 * scale;
    if (groups.group[j] >= 0 && !(s.tau0[j] > 0.0 && s.tau0[j] < s.tau1[j]))
      throw ConfigError("ssvs", "spike scale must be positive and below the slab scale");
  }
  s.gamma.assign(n, 1);
  s.learn_p = !cfg.p.has_value();
  s.s1 = cfg.s1;
  s.s2 = cfg.s2;
  s.p = Eigen::VectorXd::Constant(groups.n_groups, cfg.p ? *cfg.p : cfg.s1 / (cfg.s1 + cfg.s2));
  return s;
}

double ssvs_inclusion_probability(double beta, double tau0, double tau1, double p) {
  const double l1 = std::log(p) - std::log(tau1) - beta * beta / (2.0 * tau1 * tau1);
  const double l0 = std::log1p(-p) - std::log(tau0) - beta * beta / (2.0 * tau0 * tau0);
  return 1.0 / (1.0 + std::exp(l0 - l1));
}

void ssvs_update(SsvsState& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng) {
  check_size(beta, groups, "ssvs_update");
  for (int g = 0; g < groups.n_groups; ++g) {
    const auto idx = groups.members(g);
    int included = 0;
    for (int j : idx) {
      s.gamma[j] = rng.bernoulli(ssvs_inclusion_probability(beta[j], s.tau0[j], s.tau1[j], s.p[g])) ? 1 : 0;
      included += s.gamma[j];
    }
    if (s.learn_p) {
      const double n_g = static_cast<double>(idx.size());
      s.p[g] = rng.beta(s.s1 + included, s.s2 + n_g - included);
    }
  }
}

void ssvs_sample_prior(SsvsState& s, const GroupIndex& groups, Rng& rng) {
  for (int g = 0; g < groups.n_groups; ++g) {
    if (s.learn_p) s.p[g] = rng.beta(s.s1, s.s2);
    for (int j : groups.members(g)) s.gamma[j] = rng.bernoulli(s.p[g]) ? 1 : 0;
  }
}

Eigen::VectorXd prior_variances(const SsvsState& s, const GroupIndex& groups) {
  Eigen::VectorXd v(groups.size());
  for (int j = 0; j < groups.size(); ++j) {
    const double t = s.gamma[j] ? s.tau1[j] : s.tau0[j];
    v[j] = groups.group[j] < 0 ? 0.0 : t * t;
  }
  return v;
}

// ---------------------------------------------------------------------------
// HM

HmState hm_init(const HmConfig& cfg, const Eigen::VectorXd& scale) {
  HmState s;
  s.c1 = cfg.c1;
  s.d1 = cfg.d1;
  s.c2 = cfg.c2;
  s.d2 = cfg.d2;
  if (!(s.c1 > 0 && s.d1 > 0 && s.c2 > 0 && s.d2 > 0)) throw ConfigError("hm", "gamma hyperparameters must be positive");
  s.lambda1 = s.c1 / s.d1;
  s.lambda2 = s.c2 / s.d2;
  s.scale = scale;
  return s;
}

void hm_update(HmState& s, const Eigen::VectorXd& beta, const GroupIndex& groups, Rng& rng) {
  check_size(beta, groups, "hm_update");
  double chi1 = 0.0, chi2 = 0.0;
  int n1 = 0, n2 = 0;
  for (int j = 0; j < groups.size(); ++j) {
    if (groups.cls[j] == CoefClass::Intercept) continue;
    const double b = clamp_abs(beta[j]);
    if (groups.cls[j] == CoefClass::CrossLag) {
      chi2 += b * b / s.scale[j];
      ++n2;
    } else {
      chi1 += b * b / s.scale[j];
      ++n1;
    }
  }
  s.lambda1 = sample_gig({s.c1 - n1 / 2.0, 2.0 * s.d1, chi1}, rng);
  s.lambda2 = sample_gig({s.c2 - n2 / 2.0, 2.0 * s.d2, chi2}, rng);
}

void hm_sample_prior(HmState& s, Rng& rng) {
  s.lambda1 = rng.gamma(s.c1, s.d1);
  s.lambda2 = rng.gamma(s.c2, s.d2);
}

Eigen::VectorXd prior_variances(const HmState& s, const GroupIndex& groups) {
  Eigen::VectorXd v(groups.size());
  for (int j = 0; j < groups.size(); ++j) {
    switch (groups.cls[j]) {
      case CoefClass::Intercept: v[j] = 0.0; break;
      case CoefClass::CrossLag: v[j] = s.lambda2 * s.scale[j]; break;
      default: v[j] = s.lambda1 * s.scale[j]; break;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Data-dependent constants

Eigen::VectorXd hm_scale_constants(const Eigen::MatrixXd& Y) {
  constexpr int lags = 6;
  const int T = static_cast<int>(Y.rows());
  if (T - lags <= lags + 1) throw DimensionError("hm_scale_constants: need more than 13 observations per series");
  Eigen::VectorXd out(Y.cols());
  for (int i = 0; i < Y.cols(); ++i) {
    const int rows = T - lags;
    Eigen::MatrixXd X(rows, lags + 1);
    Eigen::VectorXd y = Y.col(i).tail(rows);
    for (int r = 0; r < rows; ++r) {
      for (int l = 1; l <= lags; ++l) X(r, l - 1) = Y(r + lags - l, i);
      X(r, lags) = 1.0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < lags + 1) throw DataError("hm_scale_constants: singular AR(6) design for series " + std::to_string(i));
    const Eigen::VectorXd coef = qr.solve(y);
    const double ssr = (y - X * coef).squaredNorm();
    out[i] = ssr / (rows - (lags + 1));
    if (!(out[i] > 0.0)) throw DataError("hm_scale_constants: zero residual variance for series " + std::to_string(i));
  }
  return out;
}

Eigen::VectorXd hm_phi_scales(const VarSpec& spec, const Eigen::VectorXd& sigma_hat, bool ratio_of_variances) {
  if (sigma_hat.size() != spec.M) throw DimensionError("hm_phi_scales: sigma_hat has wrong length");
  const int K = spec.K();
  Eigen::VectorXd s = Eigen::VectorXd::Ones(spec.n());
  for (int col = 0; col < spec.M; ++col) {
    for (int row = 0; row < K; ++row) {
      const CoefPosition pos = coef_position(spec, row, col);
      if (pos.intercept()) continue;
      const double r2 = static_cast<double>(pos.lag) * pos.lag;
      double ratio = 1.0;
      if (!pos.own()) {
        ratio = sigma_hat[col] / sigma_hat[pos.variable];
        if (!ratio_of_variances) ratio = std::sqrt(ratio);
      }
      s[col * K + row] = ratio / r2;
    }
  }
  return s;
}

namespace {

struct NwPosterior {
  Eigen::MatrixXd Vbar;
  Eigen::MatrixXd Phibar;
  Eigen::MatrixXd Sbar;
  double nu;
};

NwPosterior normal_wishart(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const int K = static_cast<int>(X.cols());
  const int M = static_cast<int>(Y.cols());
  const int T = static_cast<int>(X.rows());
  constexpr double v0 = 10.0;
  NwPosterior post;
  const Eigen::MatrixXd prec = X.transpose() * X + Eigen::MatrixXd::Identity(K, K) / v0;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericalError("normal_wishart: posterior precision not positive definite");
  post.Vbar = llt.solve(Eigen::MatrixXd::Identity(K, K));
  post.Phibar = llt.solve(X.transpose() * Y);
  const Eigen::MatrixXd E = Y - X * post.Phibar;
  post.Sbar = E.transpose() * E + post.Phibar.transpose() * post.Phibar / v0;
  post.nu = M + 2.0 + T;
  return post;
}

}  // namespace

Eigen::VectorXd normal_wishart_variances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const int K = static_cast<int>(X.cols());
  const int M = static_cast<int>(Y.cols());
  const NwPosterior post = normal_wishart(X, Y);
  Eigen::VectorXd v(K * M);
  const double denom = post.nu - M - 1.0;
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < K; ++k) v[i * K + k] = post.Sbar(i, i) / denom * post.Vbar(k, k);
  if (!v.allFinite() || (v.array() <= 0.0).any()) throw NumericalError("normal_wishart_variances: non-finite variance");
  return v;
}

Eigen::VectorXd normal_wishart_l_variances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const int M = static_cast<int>(Y.cols());
  const NwPosterior post = normal_wishart(X, Y);
  const Eigen::MatrixXd E = Y - X * post.Phibar;
  Eigen::VectorXd v(M * (M - 1) / 2);
  for (int i = 1; i < M; ++i) {
    const Eigen::VectorXd var = normal_wishart_variances(E.leftCols(i), E.col(i));
    v.segment(CovFactor::offset(i), i) = var;
  }
  return v;
}

SsvsScales ssvs_semiautomatic_scales(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double c0, double c1) {
  const Eigen::VectorXd sd = normal_wishart_variances(X, Y).cwiseSqrt();
  return {c0 * sd, c1 * sd};
}

// ---------------------------------------------------------------------------
// Type-erased wrappers

namespace {

Eigen::VectorXd finish_variances(Eigen::VectorXd v, const GroupIndex& g, double intercept_variance) {
  for (int j = 0; j < v.size(); ++j) {
    if (g.cls[j] == CoefClass::Intercept) v[j] = intercept_variance;
    else v[j] = std::max(v[j], kVarianceFloor);
  }
  return v;
}

std::string group_suffix(int g, int G) { return G > 1 ? "_" + std::to_string(g + 1) : ""; }

class R2d2Prior final : public Prior {
 public:
  R2d2Prior(GroupIndex g, R2d2State s, double iv) : Prior(std::move(g)), s_(std::move(s)), iv_(iv) {}
  PriorFamily family() const override { return PriorFamily::R2D2; }
  Eigen::VectorXd variances() const override { return finish_variances(prior_variances(s_, groups_), groups_, iv_); }
  void update(const Eigen::VectorXd& beta, Rng& rng) override { r2d2_update(s_, beta, groups_, rng); }
  void sample_prior(Rng& rng) override { r2d2_sample_prior(s_, groups_, rng); }
  std::vector<std::string> hyper_names() const override {
    std::vector<std::string> out;
    for (int g = 0; g < groups_.n_groups; ++g) {
      const auto sfx = group_suffix(g, groups_.n_groups);
      for (const char* n : {"zeta", "xi", "b", "a_pi"}) out.push_back(n + sfx);
    }
    return out;
  }
  Eigen::VectorXd hyper_values() const override {
    Eigen::VectorXd v(4 * groups_.n_groups);
    for (int g = 0; g < groups_.n_groups; ++g) v.segment(4 * g, 4) << s_.zeta[g], s_.xi[g], s_.b[g], s_.a_pi[g];
    return v;
  }
  std::unique_ptr<Prior> clone() const override { return std::make_unique<R2d2Prior>(*this); }

 private:
  R2d2State s_;
  double iv_;
};

class DlPrior final : public Prior {
 public:
  DlPrior(GroupIndex g, DlState s, double iv) : Prior(std::move(g)), s_(std::move(s)), iv_(iv) {}
  PriorFamily family() const override { return PriorFamily::DL; }
  Eigen::VectorXd variances() const override { return finish_variances(prior_variances(s_, groups_), groups_, iv_); }
  void update(const Eigen::VectorXd& beta, Rng& rng) override { dl_update(s_, beta, groups_, rng); }
  void sample_prior(Rng& rng) override { dl_sample_prior(s_, groups_, rng); }
  std::vector<std::string> hyper_names() const override {
    std::vector<std::string> out;
    for (int g = 0; g < groups_.n_groups; ++g) {
      const auto sfx = group_suffix(g, groups_.n_groups);
      out.push_back("zeta" + sfx);
      out.push_back("a" + sfx);
    }
    return out;
  }
  Eigen::VectorXd hyper_values() const override {
    Eigen::VectorXd v(2 * groups_.n_groups);
    for (int g = 0; g < groups_.n_groups; ++g) v.segment(2 * g, 2) << s_.zeta[g], s_.a[g];
    return v;
  }
  std::unique_ptr<Prior> clone() const override { return std::make_unique<DlPrior>(*this); }

 private:
  DlState s_;
  double iv_;
};

class SsvsPrior final : public Prior {
 public:
  SsvsPrior(GroupIndex g, SsvsState s, double iv) : Prior(std::move(g)), s_(std::move(s)), iv_(iv) {}
  PriorFamily family() const override { return PriorFamily::SSVS; }
  Eigen::VectorXd variances() const override { return finish_variances(prior_variances(s_, groups_), groups_, iv_); }
  void update(const Eigen::VectorXd& beta, Rng& rng) override { ssvs_update(s_, beta, groups_, rng); }
  void sample_prior(Rng& rng) override { ssvs_sample_prior(s_, groups_, rng); }
  std::vector<std::string> hyper_names() const override {
    std::vector<std::string> out;
    for (int g = 0; g < groups_.n_groups; ++g) {
      const auto sfx = group_suffix(g, groups_.n_groups);
      out.push_back("p" + sfx);
      out.push_back("included" + sfx);
    }
    return out;
  }
  Eigen::VectorXd hyper_values() const override {
    Eigen::VectorXd v(2 * groups_.n_groups);
    for (int g = 0; g < groups_.n_groups; ++g) {
      double inc = 0.0;
      for (int j : groups_.members(g)) inc += s_.gamma[j];
      v.segment(2 * g, 2) << s_.p[g], inc;
    }
    return v;
  }
  std::unique_ptr<Prior> clone() const override { return std::make_unique<SsvsPrior>(*this); }

 private:
  SsvsState s_;
  double iv_;
};

class HmPrior final : public Prior {
 public:
  HmPrior(GroupIndex g, HmState s, double iv) : Prior(std::move(g)), s_(std::move(s)), iv_(iv) {}
  PriorFamily family() const override { return PriorFamily::HM; }
  Eigen::VectorXd variances() const override { return finish_variances(prior_variances(s_, groups_), groups_, iv_); }
  void update(const Eigen::VectorXd& beta, Rng& rng) override { hm_update(s_, beta, groups_, rng); }
  void sample_prior(Rng& rng) override { hm_sample_prior(s_, rng); }
  std::vector<std::string> hyper_names() const override { return {"lambda1", "lambda2"}; }
  Eigen::VectorXd hyper_values() const override { return Eigen::Vector2d(s_.lambda1, s_.lambda2); }
  std::unique_ptr<Prior> clone() const override { return std::make_unique<HmPrior>(*this); }

 private:
  HmState s_;
  double iv_;
};

class FlatPrior final : public Prior {
 public:
  FlatPrior(GroupIndex g, double v, double iv) : Prior(std::move(g)), v_(v), iv_(iv) {}
  PriorFamily family() const override { return PriorFamily::FLAT; }
  Eigen::VectorXd variances() const override {
    return finish_variances(Eigen::VectorXd::Constant(groups_.size(), v_), groups_, iv_);
  }
  void update(const Eigen::VectorXd& beta, Rng&) override { check_size(beta, groups_, "flat_update"); }
  void sample_prior(Rng&) override {}
  std::vector<std::string> hyper_names() const override { return {}; }
  Eigen::VectorXd hyper_values() const override { return Eigen::VectorXd(0); }
  std::unique_ptr<Prior> clone() const override { return std::make_unique<FlatPrior>(*this); }

 private:
  double v_;
  double iv_;
};

}  // namespace

std::unique_ptr<Prior> make_prior(const PriorConfig& cfg, const GroupIndex& groups, const PriorContext& ctx) {
  const double iv = cfg.intercept_variance;
  switch (cfg.family) {
    case PriorFamily::R2D2:
      return std::make_unique<R2d2Prior>(groups, r2d2_init(groups, cfg.r2d2, ctx.T), iv);
    case PriorFamily::DL:
      return std::make_unique<DlPrior>(groups, dl_init(groups, cfg.dl, ctx.K), iv);
    case PriorFamily::SSVS:
      return std::make_unique<SsvsPrior>(groups, ssvs_init(groups, cfg.ssvs, ctx.ssvs_sd), iv);
    case PriorFamily::HM: {
      Eigen::VectorXd scale = ctx.hm_scale.size() == groups.size() ? ctx.hm_scale
                                                                   : Eigen::VectorXd::Ones(groups.size());
      return std::make_unique<HmPrior>(groups, hm_init(cfg.hm, scale), iv);
    }
    case PriorFamily::FLAT:
      return std::make_unique<FlatPrior>(groups, cfg.flat_variance, iv);
  }
  throw ConfigError("family", "unhandled prior family");
}

PriorContext phi_prior_context(const Design& design, const VarSpec& spec, const PriorConfig& cfg) {
  PriorContext ctx;
  ctx.T = static_cast<int>(design.X.rows());
  ctx.K = spec.K();
  if (cfg.family == PriorFamily::HM) {
    // The AR(6) fits use the response block; its first p rows are lost, which
    // is immaterial for a scale estimate.
    ctx.hm_scale = hm_phi_scales(spec, hm_scale_constants(design.Y), cfg.hm.ratio_of_variances);
  }
  if (cfg.family == PriorFamily::SSVS && !(cfg.ssvs.tau0 && cfg.ssvs.tau1))
    ctx.ssvs_sd = normal_wishart_variances(design.X, design.Y).cwiseSqrt();
  return ctx;
}

PriorContext l_prior_context(const Design& design, const PriorConfig& cfg) {
  PriorContext ctx;
  ctx.T = static_cast<int>(design.X.rows());
  ctx.K = static_cast<int>(design.Y.cols());
  const int n_l = static_cast<int>(design.Y.cols() * (design.Y.cols() - 1) / 2);
  ctx.hm_scale = Eigen::VectorXd::Ones(n_l);
  if (cfg.family == PriorFamily::SSVS && !(cfg.ssvs.tau0 && cfg.ssvs.tau1) && n_l > 0)
    ctx.ssvs_sd = normal_wishart_l_variances(design.X, design.Y).cwiseSqrt();
  return ctx;
}

}  // namespace bvarsv
