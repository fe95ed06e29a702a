#include "bvarsv/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bvarsv/error.hpp"

namespace bvarsv {

static_assert(std::endian::native == std::endian::little, "draw container assumes a little-endian host");

void McmcConfig::validate() const {
  if (draws < 1) throw ConfigError("mcmc.draws", "must be at least 1");
  if (burnin < 0) throw ConfigError("mcmc.burnin", "must be nonnegative");
  if (thin < 1) throw ConfigError("mcmc.thin", "must be at least 1");
  if (retained() < 1) throw ConfigError("mcmc.thin", "no draw retained (thin > draws)");
}

Eigen::MatrixXd PosteriorDraws::phi_matrix(int draw) const {
  const int K = spec.K();
  Eigen::MatrixXd out(K, spec.M);
  for (int c = 0; c < spec.M; ++c)
    for (int r = 0; r < K; ++r) out(r, c) = phi(draw, c * K + r);
  return out;
}

CovFactor PosteriorDraws::factor(int draw) const { return CovFactor(l.row(draw).transpose()); }

SvParams PosteriorDraws::sv_params(int draw, int series) const {
  return {sv(draw, 3 * series), sv(draw, 3 * series + 1), sv(draw, 3 * series + 2)};
}

namespace {

// Gaussian draw with precision P and linear term b: N(P^{-1} b, P^{-1}).
Eigen::VectorXd draw_canonical(const Eigen::MatrixXd& P, const Eigen::VectorXd& b, Rng& rng, const std::string& what) {
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky failure of the conditional precision, " + what);
  Eigen::VectorXd mean = llt.solve(b);
  Eigen::VectorXd z(b.size());
  for (int k = 0; k < z.size(); ++k) z(k) = rng.normal();
  Eigen::VectorXd out = mean + llt.matrixU().solve(z);
  if (!out.allFinite()) throw NumericalError("non-finite Gaussian draw, " + what);
  return out;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

Eigen::MatrixXd draw_phi_triangular(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X, const Eigen::MatrixXd& phi,
                                    const CovFactor& factor, const Eigen::MatrixXd& H, const Eigen::MatrixXd& V,
                                    Rng& rng, bool corrected) {
  const int T = static_cast<int>(Y.rows());
  const int M = static_cast<int>(Y.cols());
  const int K = static_cast<int>(X.cols());
  if (X.rows() != T || phi.rows() != K || phi.cols() != M || H.rows() != T || H.cols() != M || V.rows() != K ||
      V.cols() != M || factor.l.size() != M * (M - 1) / 2)
    throw DimensionError("draw_phi_triangular: inconsistent dimensions");
  check_finite(H, "log-variances");
  if ((V.array() <= 0.0).any() || !V.allFinite()) throw DomainError("prior variances must be positive");

  const Eigen::MatrixXd A = factor.A(M);
  const Eigen::MatrixXd prec_h = (-H).array().exp().matrix();
  Eigen::MatrixXd out = phi;
  Eigen::MatrixXd Xi = (Y - X * phi) * A.transpose();

  Eigen::VectorXd w(T), r(T);
  for (int i = 0; i < M; ++i) {
    const Eigen::VectorXd fit_old = X * out.col(i);
    const int j_end = corrected ? M : i + 1;
    w.setZero();
    r.setZero();
    for (int j = i; j < j_end; ++j) {
      const double a = A(j, i);
      if (a == 0.0) continue;
      for (int t = 0; t < T; ++t) {
        const double c = Xi(t, j) + a * fit_old(t);
        w(t) += a * a * prec_h(t, j);
        r(t) += a * prec_h(t, j) * c;
      }
    }
    Eigen::MatrixXd P = X.transpose() * w.asDiagonal() * X;
    P.diagonal() += V.col(i).cwiseInverse();
    const Eigen::VectorXd b = X.transpose() * r;
    out.col(i) = draw_canonical(P, b, rng, "equation " + std::to_string(i + 1));

    const Eigen::VectorXd delta = X * out.col(i) - fit_old;
    for (int j = i; j < M; ++j)
      if (A(j, i) != 0.0) Xi.col(j) -= A(j, i) * delta;
  }
  return out;
}

CovFactor draw_l(const Eigen::MatrixXd& E, const Eigen::MatrixXd& H, const Eigen::VectorXd& V, Rng& rng) {
  const int T = static_cast<int>(E.rows());
  const int M = static_cast<int>(E.cols());
  if (H.rows() != T || H.cols() != M || V.size() != M * (M - 1) / 2)
    throw DimensionError("draw_l: inconsistent dimensions");
  check_finite(H, "log-variances");
  if ((V.array() <= 0.0).any() || !V.allFinite()) throw DomainError("prior variances must be positive");

  CovFactor f = CovFactor::zeros(M);
  for (int i = 1; i < M; ++i) {
    const Eigen::MatrixXd Z = E.leftCols(i);
    const Eigen::VectorXd w = (-H.col(i)).array().exp().matrix();
    Eigen::MatrixXd P = Z.transpose() * w.asDiagonal() * Z;
    const int off = CovFactor::offset(i);
    P.diagonal() += V.segment(off, i).cwiseInverse();
    const Eigen::VectorXd b = Z.transpose() * w.cwiseProduct(E.col(i));
    // eps_i = -sum_k A(i,k) eps_k + xi_i, so the regression slope is -l.
    f.l.segment(off, i) = -draw_canonical(P, b, rng, "covariance equation " + std::to_string(i + 1));
  }
  return f;
}

Eigen::MatrixXd ChainState::H() const {
  if (paths.empty()) return {};
  const int T = static_cast<int>(paths.front().h.size());
  Eigen::MatrixXd out(T, static_cast<int>(paths.size()));
  for (std::size_t j = 0; j < paths.size(); ++j) out.col(static_cast<int>(j)) = paths[j].h;
  return out;
}

GibbsSampler::GibbsSampler(const Design& design, const VarSpec& spec, const SamplerConfig& cfg)
    : design_(design), spec_(spec), cfg_(cfg) {
  if (design.Y.cols() != spec.M || design.X.cols() != spec.K() || design.X.rows() != design.Y.rows())
    throw DimensionError("design does not match the model dimensions");
  if (design.Y.rows() < 1) throw DataError("empty estimation sample");

  phi_prior_ = make_prior(cfg.phi_prior, phi_groups(spec, cfg.phi_prior.grouping),
                          phi_prior_context(design, spec, cfg.phi_prior));
  if (spec.n_l() > 0) l_prior_ = make_prior(cfg.l_prior, l_groups(spec.M), l_prior_context(design, cfg.l_prior));

  state_.phi = Eigen::MatrixXd::Zero(spec.K(), spec.M);
  state_.factor = CovFactor::zeros(spec.M);
  state_.paths.resize(spec.M);
  state_.sv.resize(spec.M);
  for (int j = 0; j < spec.M; ++j) sv_init(design.Y.col(j), cfg.sv_priors, state_.paths[j], state_.sv[j]);
}

GibbsSampler::GibbsSampler(const GibbsSampler& o)
    : design_(o.design_),
      spec_(o.spec_),
      cfg_(o.cfg_),
      phi_prior_(o.phi_prior_->clone()),
      l_prior_(o.l_prior_ ? o.l_prior_->clone() : nullptr),
      state_(o.state_),
      sv_stats_(o.sv_stats_),
      iteration_(o.iteration_) {}

void GibbsSampler::set_response(const Eigen::MatrixXd& Y) {
  if (Y.rows() != design_.Y.rows() || Y.cols() != design_.Y.cols())
    throw DimensionError("replacement response has the wrong shape");
  design_.Y = Y;
}

namespace {

template <class F>
void labelled(long iteration, const char* step, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    const std::string msg = "iteration " + std::to_string(iteration) + ", step " + step + ": " + e.what();
    if (e.kind() == "numerical") throw NumericalError(msg);
    if (e.kind() == "domain") throw DomainError(msg);
    if (e.kind() == "dimension") throw DimensionError(msg);
    throw Error(e.kind(), msg);
  }
}

}  // namespace

void GibbsSampler::sweep(Rng& rng) {
  const int K = spec_.K(), M = spec_.M;
  Eigen::MatrixXd H = state_.H();
  Eigen::MatrixXd E;
  labelled(iteration_, "phi", [&] {
    const Eigen::MatrixXd V = phi_prior_->variances().reshaped(K, M);
    state_.phi = draw_phi_triangular(design_.Y, design_.X, state_.phi, state_.factor, H, V, rng, cfg_.corrected);
  });
  E = design_.Y - design_.X * state_.phi;
  labelled(iteration_, "l", [&] {
    if (l_prior_) state_.factor = draw_l(E, H, l_prior_->variances(), rng);
  });
  labelled(iteration_, "sv", [&] {
    const Eigen::MatrixXd Xi = E * state_.factor.A(M).transpose();
    for (int j = 0; j < M; ++j)
      sv_update(Xi.col(j), state_.paths[j], state_.sv[j], cfg_.sv_priors, rng, cfg_.sv_options, &sv_stats_);
  });
  labelled(iteration_, "phi-prior", [&] { phi_prior_->update(state_.phi.reshaped(), rng); });
  labelled(iteration_, "l-prior", [&] {
    if (l_prior_) l_prior_->update(state_.factor.l, rng);
  });
  ++iteration_;
}

std::vector<std::string> GibbsSampler::hyper_names() const {
  std::vector<std::string> out;
  for (const auto& n : phi_prior_->hyper_names()) out.push_back("phi." + n);
  if (l_prior_)
    for (const auto& n : l_prior_->hyper_names()) out.push_back("l." + n);
  return out;
}

Eigen::VectorXd GibbsSampler::hyper_values() const {
  const Eigen::VectorXd a = phi_prior_->hyper_values();
  const Eigen::VectorXd b = l_prior_ ? l_prior_->hyper_values() : Eigen::VectorXd();
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

PosteriorDraws run_mcmc(const Dataset& data, const VarSpec& spec, const SamplerConfig& cfg, const McmcConfig& mcmc) {
  mcmc.validate();
  const Design design = build_design(data, spec);
  GibbsSampler sampler(design, spec, cfg);
  Rng rng(mcmc.seed);

  const int R = mcmc.retained();
  const int M = spec.M;
  PosteriorDraws d;
  d.spec = spec;
  d.names = data.names;
  d.hyper_names = sampler.hyper_names();
  d.phi.resize(R, spec.n());
  d.l.resize(R, spec.n_l());
  d.sv.resize(R, 3 * M);
  d.h_last.resize(R, M);
  d.hyper.resize(R, static_cast<int>(d.hyper_names.size()));

  for (int it = 0; it < mcmc.burnin; ++it) sampler.sweep(rng);
  int kept = 0;
  for (int it = 0; it < mcmc.draws && kept < R; ++it) {
    sampler.sweep(rng);
    if ((it + 1) % mcmc.thin != 0) continue;
    const ChainState& s = sampler.state();
    if (!s.phi.allFinite()) throw NumericalError("non-finite coefficient draw at iteration " + std::to_string(it));
    d.phi.row(kept) = s.phi.reshaped().transpose();
    d.l.row(kept) = s.factor.l.transpose();
    for (int j = 0; j < M; ++j) {
      d.sv(kept, 3 * j) = s.sv[j].mu;
      d.sv(kept, 3 * j + 1) = s.sv[j].rho;
      d.sv(kept, 3 * j + 2) = s.sv[j].sigma;
      d.h_last(kept, j) = s.paths[j].h(s.paths[j].h.size() - 1);
    }
    d.hyper.row(kept) = sampler.hyper_values().transpose();
    ++kept;
  }
  d.rho_proposals = sampler.sv_stats().rho_proposals;
  d.rho_accepts = sampler.sv_stats().rho_accepts;
  return d;
}

// ---------------------------------------------------------------------------
// Persistence.

namespace {

constexpr char kMagic[8] = {'B', 'V', 'S', 'V', 'D', 'R', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("truncated draw container");
  return v;
}

void put_string(std::ofstream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& is) {
  const auto n = get<std::uint32_t>(is);
  if (n > (1u << 20)) throw DataError("implausible string length in draw container");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw DataError("truncated draw container");
  return s;
}

}  // namespace

void write_draws(const PosteriorDraws& d, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::int32_t>(os, d.size());
  put<std::int32_t>(os, d.spec.M);
  put<std::int32_t>(os, d.spec.p);
  put<std::int32_t>(os, d.spec.intercept ? 1 : 0);
  put<std::int32_t>(os, static_cast<std::int32_t>(d.hyper_names.size()));
  put<std::int64_t>(os, d.rho_proposals);
  put<std::int64_t>(os, d.rho_accepts);
  for (int j = 0; j < d.spec.M; ++j) put_string(os, j < static_cast<int>(d.names.size()) ? d.names[j] : "");
  for (const auto& n : d.hyper_names) put_string(os, n);
  for (int r = 0; r < d.size(); ++r) {
    for (const auto* m : {&d.phi, &d.l, &d.sv, &d.h_last, &d.hyper})
      for (int c = 0; c < m->cols(); ++c) put<double>(os, (*m)(r, c));
  }
  if (!os) throw DataError("write failure on " + path);
}

PosteriorDraws read_draws(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError(path + " is not a draw container");
  if (get<std::uint32_t>(is) != kVersion) throw DataError("unsupported draw container version");
  PosteriorDraws d;
  const int R = get<std::int32_t>(is);
  const int M = get<std::int32_t>(is);
  const int p = get<std::int32_t>(is);
  const bool intercept = get<std::int32_t>(is) != 0;
  const int nh = get<std::int32_t>(is);
  if (R < 0 || M < 1 || p < 1 || nh < 0) throw DataError("corrupt draw container header");
  d.spec = VarSpec(M, p, intercept);
  d.rho_proposals = get<std::int64_t>(is);
  d.rho_accepts = get<std::int64_t>(is);
  for (int j = 0; j < M; ++j) d.names.push_back(get_string(is));
  for (int k = 0; k < nh; ++k) d.hyper_names.push_back(get_string(is));
  d.phi.resize(R, d.spec.n());
  d.l.resize(R, d.spec.n_l());
  d.sv.resize(R, 3 * M);
  d.h_last.resize(R, M);
  d.hyper.resize(R, nh);
  for (int r = 0; r < R; ++r)
    for (auto* m : {&d.phi, &d.l, &d.sv, &d.h_last, &d.hyper})
      for (int c = 0; c < m->cols(); ++c) (*m)(r, c) = get<double>(is);
  return d;
}

namespace {

// Linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.size() == 1) return v.front();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SummaryRow summarize_column(std::string name, const Eigen::VectorXd& x) {
  SummaryRow row{std::move(name), 0, 0, 0, 0, 0, 0, 0};
  const double n = static_cast<double>(x.size());
  row.mean = x.mean();
  row.sd = x.size() > 1 ? std::sqrt((x.array() - row.mean).square().sum() / (n - 1.0)) : 0.0;
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  row.q05 = quantile_sorted(v, 0.05);
  row.q25 = quantile_sorted(v, 0.25);
  row.median = quantile_sorted(v, 0.5);
  row.q75 = quantile_sorted(v, 0.75);
  row.q95 = quantile_sorted(v, 0.95);
  return row;
}

}  // namespace

std::vector<std::string> phi_parameter_names(const VarSpec& spec, const std::vector<std::string>& names) {
  auto name = [&](int j) { return j < static_cast<int>(names.size()) ? names[j] : "y" + std::to_string(j + 1); };
  std::vector<std::string> out;
  for (int c = 0; c < spec.M; ++c)
    for (int r = 0; r < spec.K(); ++r) {
      const CoefPosition pos = coef_position(spec, r, c);
      out.push_back(pos.intercept() ? "phi." + name(c) + ".const"
                                    : "phi." + name(c) + "." + name(pos.variable) + ".L" + std::to_string(pos.lag));
    }
  return out;
}

std::vector<std::string> l_parameter_names(int M, const std::vector<std::string>& names) {
  auto name = [&](int j) { return j < static_cast<int>(names.size()) ? names[j] : "y" + std::to_string(j + 1); };
  std::vector<std::string> out;
  for (int i = 1; i < M; ++i)
    for (int k = 0; k < i; ++k) out.push_back("l." + name(i) + "." + name(k));
  return out;
}

std::vector<SummaryRow> summarize(const PosteriorDraws& d) {
  if (d.size() == 0) throw DataError("no draws to summarize");
  const int M = d.spec.M;
  auto name = [&](int j) { return j < static_cast<int>(d.names.size()) ? d.names[j] : "y" + std::to_string(j + 1); };
  std::vector<SummaryRow> rows;
  const auto phi_names = phi_parameter_names(d.spec, d.names);
  for (int j = 0; j < d.spec.n(); ++j) rows.push_back(summarize_column(phi_names[j], d.phi.col(j)));
  const auto l_names = l_parameter_names(M, d.names);
  for (int j = 0; j < d.spec.n_l(); ++j) rows.push_back(summarize_column(l_names[j], d.l.col(j)));
  const char* sv_names[3] = {"mu", "rho", "sigma"};
  for (int j = 0; j < M; ++j)
    for (int q = 0; q < 3; ++q)
      rows.push_back(summarize_column(std::string("sv.") + sv_names[q] + "." + name(j), d.sv.col(3 * j + q)));
  for (int j = 0; j < M; ++j) rows.push_back(summarize_column("h_last." + name(j), d.h_last.col(j)));
  for (int k = 0; k < static_cast<int>(d.hyper_names.size()); ++k)
    rows.push_back(summarize_column("hyper." + d.hyper_names[k], d.hyper.col(k)));
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open " + path + " for writing");
  std::fprintf(f, "parameter,mean,sd,q05,q25,median,q75,q95\n");
  for (const auto& r : rows)
    std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.parameter.c_str(), r.mean, r.sd, r.q05, r.q25,
                 r.median, r.q75, r.q95);
  std::fclose(f);
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::string line;
  std::getline(is, line);
  if (line.rfind("parameter,", 0) != 0) throw DataError(path + ": missing summary header");
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    SummaryRow r;
    std::string cell;
    std::getline(ss, r.parameter, ',');
    double* fields[7] = {&r.mean, &r.sd, &r.q05, &r.q25, &r.median, &r.q75, &r.q95};
    for (double* f : fields) {
      if (!std::getline(ss, cell, ',')) throw DataError(path + ": short summary row");
      *f = std::stod(cell);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace bvarsv
