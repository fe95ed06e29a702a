#include "bvarsv/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "bvarsv/diagnostics.hpp"
#include "bvarsv/error.hpp"
#include "bvarsv/parallel.hpp"

namespace bvarsv {

std::string to_string(DgpKind k) { return k == DgpKind::Sparse ? "sparse" : "dense"; }

DgpKind dgp_kind_from_string(const std::string& s) {
  if (s == "sparse") return DgpKind::Sparse;
  if (s == "dense") return DgpKind::Dense;
  throw ConfigError("kind", "unknown scenario '" + s + "', expected sparse or dense");
}

DgpScenario DgpScenario::sparse(int M, int T) {
  DgpScenario s;
  s.kind = DgpKind::Sparse;
  s.M = M;
  s.T = T;
  return s;
}

DgpScenario DgpScenario::dense(int M, int T) {
  DgpScenario s;
  s.kind = DgpKind::Dense;
  s.M = M;
  s.T = T;
  s.cross_prob = 0.8;
  s.mu_cross = s.sd_cross = 0.01;
  s.l_prob = 0.8;
  return s;
}

std::string DgpScenario::label() const { return to_string(kind); }

void DgpScenario::validate() const {
  auto prob = [](double v, const char* f) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(f, "probability must lie in [0, 1]");
  };
  auto nonneg = [](double v, const char* f) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(f, "must be finite and nonnegative");
  };
  if (M < 1) throw ConfigError("M", "must be positive");
  if (p < 1) throw ConfigError("p", "must be positive");
  if (T < 1) throw ConfigError("T", "must be positive");
  if (warmup < 0) throw ConfigError("warmup", "must be nonnegative");
  if (max_redraws < 1) throw ConfigError("max_redraws", "must be positive");
  prob(own_prob, "own_prob");
  prob(cross_prob, "cross_prob");
  prob(l_prob, "l_prob");
  nonneg(sd_own, "sd_own");
  nonneg(sd_cross, "sd_cross");
  nonneg(sd_l, "sd_l");
  nonneg(sigma_lo, "sigma_lo");
  if (!(sigma_hi >= sigma_lo)) throw ConfigError("sigma_hi", "must not be below sigma_lo");
  if (!(rho_lo > -1.0 && rho_hi < 1.0 && rho_lo <= rho_hi))
    throw ConfigError("rho_lo", "persistence range must lie inside (-1, 1)");
  if (!std::isfinite(sv_mu)) throw ConfigError("sv_mu", "must be finite");
}

Eigen::MatrixXd draw_dgp_coefficients(const DgpScenario& s, Rng& rng) {
  const VarSpec spec(s.M, s.p, false);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(spec.K(), s.M);
  for (int c = 0; c < s.M; ++c)
    for (int r = 0; r < spec.K(); ++r) {
      const bool own = coef_position(spec, r, c).own();
      if (rng.bernoulli(own ? s.own_prob : s.cross_prob))
        phi(r, c) = own ? rng.normal(s.mu_own, s.sd_own) : rng.normal(s.mu_cross, s.sd_cross);
    }
  return phi;
}

DgpSample generate_dgp(const DgpScenario& s, Rng& rng) {
  s.validate();
  DgpSample out;
  DgpTruth& tr = out.truth;
  tr.spec = VarSpec(s.M, s.p, false);
  for (;;) {
    tr.phi = draw_dgp_coefficients(s, rng);
    if (companion_stable(tr.phi, tr.spec)) break;
    if (++tr.redraws >= s.max_redraws)
      throw NumericalError("generate_dgp: no stable coefficient draw in " + std::to_string(s.max_redraws) + " attempts");
  }
  tr.factor = CovFactor::zeros(s.M);
  for (Eigen::Index k = 0; k < tr.factor.l.size(); ++k)
    if (rng.bernoulli(s.l_prob)) tr.factor.l[k] = rng.normal(s.mu_l, s.sd_l);
  for (int j = 0; j < s.M; ++j) {
    SvParams sv;
    sv.mu = s.sv_mu;
    sv.rho = s.rho_lo + (s.rho_hi - s.rho_lo) * rng.uniform();
    sv.sigma = s.sigma_lo + (s.sigma_hi - s.sigma_lo) * rng.uniform();
    tr.sv.push_back(sv);
  }

  const int total = s.warmup + s.T;
  const Eigen::MatrixXd A = tr.factor.A(s.M);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(s.p + total, s.M);  // p zero pre-sample rows
  Eigen::VectorXd h(s.M);
  for (int j = 0; j < s.M; ++j) h[j] = tr.sv[j].mu;
  tr.H.resize(s.T, s.M);
  Eigen::VectorXd xi(s.M);
  for (int t = 0; t < total; ++t) {
    for (int j = 0; j < s.M; ++j) {
      const auto& sv = tr.sv[j];
      h[j] = sv.mu + sv.rho * (h[j] - sv.mu) + sv.sigma * rng.normal();
      xi[j] = std::exp(0.5 * h[j]) * rng.normal();
    }
    const int row = s.p + t;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(s.M);
    for (int lag = 1; lag <= s.p; ++lag)
      mean += Y.row(row - lag) * tr.phi.middleRows((lag - 1) * s.M, s.M);
    // xi = A eps
    const Eigen::VectorXd eps = A.triangularView<Eigen::UnitLower>().solve(xi);
    Y.row(row) = mean + eps.transpose();
    if (t >= s.warmup) tr.H.row(t - s.warmup) = h.transpose();
  }
  if (!Y.allFinite()) throw NumericalError("generate_dgp: simulated data are not finite");
  out.data = make_dataset(Y.bottomRows(s.T));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<StudyPrior> study_priors(bool with_flat) {
  std::vector<StudyPrior> out;
  auto add = [&](const std::string& name, auto&& set) {
    PriorConfig p;
    set(p);
    out.push_back({name, p});
  };
  add("DL", [](PriorConfig& p) {
    p.family = PriorFamily::DL;
    p.dl.a_is_inverse_K = true;
  });
  add("DL_h", [](PriorConfig& p) { p.family = PriorFamily::DL; });
  add("DL*", [](PriorConfig& p) {
    p.family = PriorFamily::DL;
    p.grouping = Grouping::SemiGlobal;
  });
  add("HM", [](PriorConfig& p) { p.family = PriorFamily::HM; });
  add("SSVS_bl", [](PriorConfig& p) {
    p.family = PriorFamily::SSVS;
    p.ssvs.c0 = 0.1;
    p.ssvs.c1 = 10.0;
    p.ssvs.p = 0.5;
  });
  add("SSVS", [](PriorConfig& p) {
    p.family = PriorFamily::SSVS;
    p.ssvs.p = 0.5;
  });
  add("SSVS_h", [](PriorConfig& p) { p.family = PriorFamily::SSVS; });
  add("SSVS*", [](PriorConfig& p) {
    p.family = PriorFamily::SSVS;
    p.grouping = Grouping::SemiGlobal;
  });
  add("R2D2", [](PriorConfig& p) {
    p.family = PriorFamily::R2D2;
    p.r2d2.b = 0.5;
  });
  add("R2D2_h", [](PriorConfig& p) { p.family = PriorFamily::R2D2; });
  add("R2D2*", [](PriorConfig& p) {
    p.family = PriorFamily::R2D2;
    p.grouping = Grouping::SemiGlobal;
  });
  if (with_flat) add("FLAT", [](PriorConfig& p) { p.family = PriorFamily::FLAT; });
  return out;
}

StudyPrior study_prior(const std::string& name) {
  for (auto& p : study_priors(true))
    if (p.name == name) return p;
  throw ConfigError("prior", "unknown study prior '" + name + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  if (v.size() % 2) return v[m];
  const double hi = v[m];
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + m));
}

std::vector<StudyCell> run_sim_study(const SimStudyConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("replications", "must be at least 1");
  if (cfg.scenarios.empty()) throw ConfigError("scenarios", "no scenarios given");
  if (cfg.priors.empty()) throw ConfigError("priors", "no priors given");
  cfg.mcmc.validate();
  for (const auto& s : cfg.scenarios) s.validate();

  const int S = static_cast<int>(cfg.scenarios.size());
  const int R = cfg.replications;
  const int P = static_cast<int>(cfg.priors.size());
  struct Result {
    double mae = 0.0, rmspd = 0.0;
    std::string error;
  };
  std::vector<Result> results(static_cast<std::size_t>(S) * R * P);
  // One task per (scenario, replication); the data are shared by all priors.
  parallel_for(S * R, resolve_threads(cfg.threads), [&](int task) {
    const int s = task / R;
    const DgpScenario& sc = cfg.scenarios[s];
    const std::uint64_t data_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task));
    DgpSample sample;
    std::string dgp_error;
    try {
      Rng rng(data_seed);
      sample = generate_dgp(sc, rng);
    } catch (const std::exception& e) {
      dgp_error = std::string("data generation: ") + e.what();
    }
    const VarSpec spec(sc.M, sc.p, cfg.intercept);
    for (int q = 0; q < P; ++q) {
      Result& res = results[static_cast<std::size_t>(task) * P + q];
      if (!dgp_error.empty()) {
        res.error = dgp_error;
        continue;
      }
      try {
        SamplerConfig sc_cfg;
        sc_cfg.phi_prior = cfg.priors[q].phi;
        sc_cfg.l_prior = cfg.l_prior;
        McmcConfig mc = cfg.mcmc;
        mc.seed = derive_seed(data_seed, 1 + static_cast<std::uint64_t>(q));
        const PosteriorDraws d = run_mcmc(sample.data, spec, sc_cfg, mc);
        Eigen::MatrixXd lag_draws = d.phi;
        Eigen::VectorXd truth = sample.truth.phi_vec();
        if (cfg.intercept) {
          // Drop the intercept rows of vec(Phi); the truth has none.
          const int K = spec.K();
          lag_draws.resize(d.phi.rows(), truth.size());
          for (int c = 0, k = 0; c < spec.M; ++c)
            for (int row = 0; row < K - 1; ++row) lag_draws.col(k++) = d.phi.col(c * K + row);
        }
        res.mae = mae(lag_draws, truth);
        res.rmspd = rmspd(lag_draws, truth);
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
  });

  std::vector<StudyCell> cells;
  for (int s = 0; s < S; ++s)
    for (int q = 0; q < P; ++q) {
      StudyCell c;
      c.scenario = cfg.scenarios[s].label();
      c.M = cfg.scenarios[s].M;
      c.T = cfg.scenarios[s].T;
      c.prior = cfg.priors[q].name;
      for (int r = 0; r < R; ++r) {
        const Result& res = results[(static_cast<std::size_t>(s) * R + r) * P + q];
        if (res.error.empty()) {
          c.mae.push_back(res.mae);
          c.rmspd.push_back(res.rmspd);
        } else {
          c.errors.push_back("rep " + std::to_string(r) + ": " + res.error);
        }
      }
      c.median_mae = median(c.mae);
      c.median_rmspd = median(c.rmspd);
      cells.push_back(std::move(c));
    }
  return cells;
}

// ---------------------------------------------------------------------------

namespace {

struct CsvFile {
  std::FILE* f;
  explicit CsvFile(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
    if (!f) throw DataError("cannot open " + path + " for writing");
  }
  ~CsvFile() { std::fclose(f); }
};

}  // namespace

void write_sim_study_csv(const std::vector<StudyCell>& cells, const std::string& path) {
  CsvFile out(path);
  std::fprintf(out.f, "scenario,M,T,prior,median_mae,median_rmspd,replications,failed\n");
  for (const auto& c : cells)
    std::fprintf(out.f, "%s,%d,%d,%s,%.17g,%.17g,%zu,%zu\n", c.scenario.c_str(), c.M, c.T, c.prior.c_str(),
                 c.median_mae, c.median_rmspd, c.mae.size() + c.errors.size(), c.errors.size());
}

void write_sim_study_table_csv(const std::vector<StudyCell>& cells, const std::string& path) {
  // Column order: scenarios in first-seen order, T ascending.
  std::vector<std::string> scen;
  std::map<std::string, std::set<int>> Ts;
  std::vector<std::pair<int, std::string>> rows;
  std::map<std::tuple<int, std::string, std::string, int>, const StudyCell*> at;
  for (const auto& c : cells) {
    if (std::find(scen.begin(), scen.end(), c.scenario) == scen.end()) scen.push_back(c.scenario);
    Ts[c.scenario].insert(c.T);
    const auto key = std::make_pair(c.M, c.prior);
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    at.emplace(std::make_tuple(c.M, c.prior, c.scenario, c.T), &c);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  CsvFile out(path);
  std::fprintf(out.f, "M,prior");
  for (const char* metric : {"MAE", "RMSPD"})
    for (const auto& s : scen)
      for (int T : Ts[s]) std::fprintf(out.f, ",%s.%s.T%d", metric, s.c_str(), T);
  std::fprintf(out.f, "\n");
  for (const auto& [M, prior] : rows) {
    std::fprintf(out.f, "%d,%s", M, prior.c_str());
    for (int metric = 0; metric < 2; ++metric)
      for (const auto& s : scen)
        for (int T : Ts[s]) {
          const auto it = at.find({M, prior, s, T});
          if (it == at.end()) {
            std::fprintf(out.f, ",");
            continue;
          }
          std::fprintf(out.f, ",%.17g", metric == 0 ? it->second->median_mae : it->second->median_rmspd);
        }
    std::fprintf(out.f, "\n");
  }
}

void write_dgp_csv(const DgpSample& s, const std::string& data_path, const std::string& truth_path) {
  {
    CsvFile out(data_path);
    std::fprintf(out.f, "t");
    for (const auto& n : s.data.names) std::fprintf(out.f, ",%s", n.c_str());
    std::fprintf(out.f, "\n");
    for (int t = 0; t < s.data.T(); ++t) {
      std::fprintf(out.f, "%s", s.data.dates[t].c_str());
      for (int j = 0; j < s.data.M(); ++j) std::fprintf(out.f, ",%.17g", s.data.Y(t, j));
      std::fprintf(out.f, "\n");
    }
  }
  CsvFile out(truth_path);
  std::fprintf(out.f, "parameter,value\n");
  const auto& tr = s.truth;
  const auto phi_names = phi_parameter_names(tr.spec, s.data.names);
  const Eigen::VectorXd phi = tr.phi_vec();
  for (Eigen::Index j = 0; j < phi.size(); ++j) std::fprintf(out.f, "%s,%.17g\n", phi_names[j].c_str(), phi[j]);
  const auto l_names = l_parameter_names(tr.spec.M, s.data.names);
  for (Eigen::Index j = 0; j < tr.factor.l.size(); ++j)
    std::fprintf(out.f, "%s,%.17g\n", l_names[j].c_str(), tr.factor.l[j]);
  for (int j = 0; j < tr.spec.M; ++j) {
    const std::string& n = s.data.names[j];
    std::fprintf(out.f, "sv.mu.%s,%.17g\nsv.rho.%s,%.17g\nsv.sigma.%s,%.17g\n", n.c_str(), tr.sv[j].mu, n.c_str(),
                 tr.sv[j].rho, n.c_str(), tr.sv[j].sigma);
  }
  for (int j = 0; j < tr.spec.M; ++j)
    std::fprintf(out.f, "h_last.%s,%.17g\n", s.data.names[j].c_str(), tr.H(tr.H.rows() - 1, j));
}

}  // namespace bvarsv
