#include "bvarsv/forecast.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bvarsv/distributions.hpp"
#include "bvarsv/error.hpp"
#include "bvarsv/parallel.hpp"

namespace bvarsv {

Eigen::VectorXd PredictiveMixture::mean() const {
  if (components.empty()) throw DataError("empty predictive mixture");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(components.front().mean.size());
  for (const auto& c : components) m += c.mean;
  return m / static_cast<double>(components.size());
}

Eigen::VectorXd shift_regressor(const Eigen::VectorXd& x, const Eigen::VectorXd& y_new, const VarSpec& spec) {
  if (x.size() != spec.K() || y_new.size() != spec.M) throw DimensionError("shift_regressor: bad dimensions");
  Eigen::VectorXd out = x;
  const int M = spec.M;
  out.segment(M, M * (spec.p - 1)) = x.segment(0, M * (spec.p - 1));
  out.head(M) = y_new;
  return out;
}

PredictiveMixture predictive_mixture(const PosteriorDraws& d, const Eigen::VectorXd& x_next, int horizon, Rng& rng,
                                     const ForecastOptions& opt) {
  if (d.size() == 0) throw DataError("predictive_mixture: no draws");
  if (horizon < 1) throw DomainError("predictive_mixture: horizon must be at least 1");
  if (opt.paths_per_draw < 1) throw ConfigError("forecast.paths_per_draw", "must be at least 1");
  const VarSpec& spec = d.spec;
  const int M = spec.M;
  if (x_next.size() != spec.K()) throw DimensionError("predictive_mixture: regressor has the wrong length");

  PredictiveMixture mix;
  mix.horizon = horizon;
  mix.components.reserve(static_cast<std::size_t>(d.size()) * opt.paths_per_draw);
  for (int r = 0; r < d.size(); ++r) {
    const Eigen::MatrixXd phi = d.phi_matrix(r);
    if (opt.stable_only && !companion_stable(phi, spec)) continue;
    const Eigen::MatrixXd Ainv = d.factor(r).A(M).inverse();
    for (int path = 0; path < opt.paths_per_draw; ++path) {
      Eigen::MatrixXd hpath(horizon, M);
      for (int j = 0; j < M; ++j) hpath.col(j) = sv_forecast(d.h_last(r, j), d.sv_params(r, j), horizon, rng);
      Eigen::VectorXd x = x_next;
      for (int s = 0; s < horizon - 1; ++s) {
        Eigen::VectorXd xi(M);
        for (int j = 0; j < M; ++j) xi(j) = std::exp(0.5 * hpath(s, j)) * rng.normal();
        const Eigen::VectorXd y = phi.transpose() * x + Ainv * xi;
        x = shift_regressor(x, y, spec);
      }
      PredictiveComponent c;
      c.mean = phi.transpose() * x;
      const Eigen::VectorXd dvar = hpath.row(horizon - 1).transpose().array().exp().matrix();
      c.cov = Ainv * dvar.asDiagonal() * Ainv.transpose();
      if (!c.mean.allFinite() || !c.cov.allFinite())
        throw NumericalError("predictive_mixture: non-finite component at draw " + std::to_string(r));
      mix.components.push_back(std::move(c));
    }
  }
  if (mix.components.empty()) throw NumericalError("predictive_mixture: every draw was filtered as explosive");
  return mix;
}

double log_normal_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("predictive component covariance is not positive definite");
  const Eigen::VectorXd z = llt.matrixL().solve(y - mean);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double k = static_cast<double>(y.size());
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

double log_predictive_likelihood(const PredictiveMixture& mix, const Eigen::VectorXd& y_obs,
                                 const std::vector<int>& subset) {
  if (mix.components.empty()) throw DataError("log_predictive_likelihood: empty mixture");
  const int M = static_cast<int>(mix.components.front().mean.size());
  if (y_obs.size() != M) throw DimensionError("log_predictive_likelihood: observation has the wrong length");
  std::vector<int> idx = subset;
  if (idx.empty())
    for (int j = 0; j < M; ++j) idx.push_back(j);
  for (int j : idx)
    if (j < 0 || j >= M) throw DomainError("log_predictive_likelihood: subset index out of range");

  const int k = static_cast<int>(idx.size());
  Eigen::VectorXd y(k);
  for (int a = 0; a < k; ++a) y(a) = y_obs(idx[a]);
  std::vector<double> lp;
  lp.reserve(mix.components.size());
  Eigen::VectorXd m(k);
  Eigen::MatrixXd S(k, k);
  for (const auto& c : mix.components) {
    for (int a = 0; a < k; ++a) {
      m(a) = c.mean(idx[a]);
      for (int b = 0; b < k; ++b) S(a, b) = c.cov(idx[a], idx[b]);
    }
    lp.push_back(log_normal_density(y, m, S));
  }
  const double out = log_sum_exp(lp) - std::log(static_cast<double>(lp.size()));
  if (!std::isfinite(out)) throw NumericalError("log_predictive_likelihood: every component density underflows");
  return out;
}

// ---------------------------------------------------------------------------

int ScorePanel::model_index(const std::string& name) const {
  for (std::size_t m = 0; m < models.size(); ++m)
    if (models[m] == name) return static_cast<int>(m);
  throw ConfigError("benchmark", "unknown model '" + name + "'");
}

namespace {

std::vector<int> column_indices(const std::vector<std::string>& names, const std::vector<std::string>& wanted,
                                const std::string& what) {
  std::vector<int> out;
  for (const auto& w : wanted) {
    int found = -1;
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j] == w) found = static_cast<int>(j);
    if (found < 0) throw ConfigError(what, "variable '" + w + "' not available");
    out.push_back(found);
  }
  return out;
}

std::string window_label(const Dataset& data, int row) {
  return row < static_cast<int>(data.dates.size()) ? data.dates[row] : "t" + std::to_string(row + 1);
}

}  // namespace

std::vector<ScorePanel> recursive_exercise(const Dataset& data, const std::vector<ModelEntry>& models,
                                           const ExerciseConfig& cfg) {
  data.validate();
  cfg.mcmc.validate();
  if (models.empty()) throw ConfigError("models", "at least one model is required");
  if (cfg.horizons.empty()) throw ConfigError("forecast.horizons", "at least one horizon is required");
  if (cfg.subsets.empty()) throw ConfigError("forecast.subsets", "at least one subset is required");
  if (cfg.first_window_end < 0 || cfg.last_window_end < cfg.first_window_end || cfg.last_window_end >= data.T() - 1)
    throw ConfigError("forecast.windows", "window ends must satisfy 0 <= first <= last < T - 1");
  int max_h = 0;
  for (int h : cfg.horizons) {
    if (h < 1) throw ConfigError("forecast.horizons", "horizons must be positive");
    max_h = std::max(max_h, h);
  }

  // Resolve variable selections up front so configuration errors abort early.
  std::vector<Dataset> model_data;
  std::vector<VarSpec> specs;
  for (const auto& m : models) {
    std::vector<int> cols;
    if (m.variables.empty())
      for (int j = 0; j < data.M(); ++j) cols.push_back(j);
    else
      cols = column_indices(data.names, m.variables, "models." + m.name + ".variables");
    model_data.push_back(data.select(cols));
    specs.push_back(VarSpec(static_cast<int>(cols.size()), m.spec.p, m.spec.intercept));
  }

  const int W = cfg.last_window_end - cfg.first_window_end + 1;
  const int NM = static_cast<int>(models.size());
  const int NH = static_cast<int>(cfg.horizons.size());
  const int NS = static_cast<int>(cfg.subsets.size());
  // scores[((w * NM + m) * NH + h) * NS + s]
  std::vector<double> scores(static_cast<std::size_t>(W) * NM * NH * NS, std::nan(""));
  std::vector<std::string> messages(static_cast<std::size_t>(W) * NM * NH * NS);

  auto cell = [&](int w, int m, int h, int s) { return ((static_cast<std::size_t>(w) * NM + m) * NH + h) * NS + s; };

  parallel_for(W * NM, cfg.threads, [&](int task) {
    const int w = task / NM, m = task % NM;
    const int end = cfg.first_window_end + w;
    const Dataset& md = model_data[m];
    const std::uint64_t seed = derive_seed(cfg.mcmc.seed, static_cast<std::uint64_t>(task));
    try {
      McmcConfig mc = cfg.mcmc;
      mc.seed = seed;
      const Dataset window = md.slice(0, end);
      const PosteriorDraws draws = run_mcmc(window, specs[m], models[m].sampler, mc);
      const Eigen::VectorXd x_next = next_regressor(window.Y, specs[m]);
      for (int h = 0; h < NH; ++h) {
        const int target = end + cfg.horizons[h];
        if (target >= md.T()) continue;
        Rng frng(derive_seed(seed, 1000u + static_cast<std::uint64_t>(cfg.horizons[h])));
        try {
          const PredictiveMixture mix = predictive_mixture(draws, x_next, cfg.horizons[h], frng, cfg.forecast);
          const Eigen::VectorXd y = md.Y.row(target).transpose();
          for (int s = 0; s < NS; ++s) {
            try {
              const auto idx = column_indices(md.names, cfg.subsets[s].variables, "forecast.subsets");
              scores[cell(w, m, h, s)] = log_predictive_likelihood(mix, y, idx);
            } catch (const std::exception& e) {
              messages[cell(w, m, h, s)] = e.what();
            }
          }
        } catch (const std::exception& e) {
          for (int s = 0; s < NS; ++s) messages[cell(w, m, h, s)] = e.what();
        }
      }
    } catch (const std::exception& e) {
      for (int h = 0; h < NH; ++h)
        for (int s = 0; s < NS; ++s) messages[cell(w, m, h, s)] = e.what();
    }
  });

  std::vector<ScorePanel> panels;
  for (int h = 0; h < NH; ++h)
    for (int s = 0; s < NS; ++s) {
      ScorePanel p;
      p.horizon = cfg.horizons[h];
      p.subset = cfg.subsets[s].label;
      for (const auto& m : models) p.models.push_back(m.name);
      std::vector<int> rows;
      for (int w = 0; w < W; ++w)
        if (cfg.first_window_end + w + p.horizon < data.T()) rows.push_back(w);
      p.lpl.resize(static_cast<int>(rows.size()), NM);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const int w = rows[r];
        p.labels.push_back(window_label(data, cfg.first_window_end + w + p.horizon));
        for (int m = 0; m < NM; ++m) {
          p.lpl(static_cast<int>(r), m) = scores[cell(w, m, h, s)];
          const auto& msg = messages[cell(w, m, h, s)];
          if (!msg.empty()) p.errors.push_back(p.labels.back() + "," + p.models[m] + ": " + msg);
        }
      }
      panels.push_back(std::move(p));
    }
  return panels;
}

Eigen::MatrixXd cumulative_scores(const ScorePanel& panel, const std::optional<std::string>& benchmark) {
  Eigen::MatrixXd out = panel.lpl;
  if (benchmark) {
    const Eigen::VectorXd b = panel.lpl.col(panel.model_index(*benchmark));
    out.colwise() -= b;
  }
  for (int r = 1; r < out.rows(); ++r) out.row(r) += out.row(r - 1);
  return out;
}

namespace {

void write_matrix_csv(const std::vector<std::string>& labels, const std::vector<std::string>& cols,
                      const Eigen::MatrixXd& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open " + path + " for writing");
  std::fprintf(f, "window");
  for (const auto& c : cols) std::fprintf(f, ",%s", c.c_str());
  std::fprintf(f, "\n");
  for (int r = 0; r < m.rows(); ++r) {
    std::fprintf(f, "%s", labels[static_cast<std::size_t>(r)].c_str());
    for (int c = 0; c < m.cols(); ++c) std::fprintf(f, ",%.17g", m(r, c));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace

void write_score_panel_csv(const ScorePanel& panel, const std::string& path) {
  write_matrix_csv(panel.labels, panel.models, panel.lpl, path);
}

void write_cumulative_csv(const ScorePanel& panel, const std::string& path, const std::optional<std::string>& benchmark) {
  write_matrix_csv(panel.labels, panel.models, cumulative_scores(panel, benchmark), path);
}

ScorePanel read_score_panel_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  ScorePanel p;
  std::string line, cell;
  if (!std::getline(is, line)) throw DataError(path + ": empty file");
  {
    std::stringstream ss(line);
    std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) p.models.push_back(cell);
  }
  if (p.models.empty()) throw DataError(path + ": no model columns");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::getline(ss, cell, ',');
    p.labels.push_back(cell);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": unparseable value '" + cell + "'");
      }
    }
    if (row.size() != p.models.size()) throw DataError(path + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  p.lpl.resize(static_cast<int>(rows.size()), static_cast<int>(p.models.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) p.lpl(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return p;
}

}  // namespace bvarsv
