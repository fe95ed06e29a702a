#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bvarsv/core_model.hpp"
#include "bvarsv/random.hpp"
#include "bvarsv/sampler.hpp"

namespace bvarsv {

struct PredictiveComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Equally weighted Gaussian mixture approximating the h-step predictive density.
struct PredictiveMixture {
  int horizon = 1;
  std::vector<PredictiveComponent> components;

  int size() const { return static_cast<int>(components.size()); }
  Eigen::VectorXd mean() const;
};

struct ForecastOptions {
  int paths_per_draw = 1;    // simulated paths per retained draw
  bool stable_only = false;  // drop draws whose companion matrix is explosive
};

/// Regressor vector after appending y_new as the most recent observation.
Eigen::VectorXd shift_regressor(const Eigen::VectorXd& x, const Eigen::VectorXd& y_new, const VarSpec& spec);

/// One component per draw and path. Horizon 1 integrates the observation
/// noise analytically and simulates only the next log-variance; longer
/// horizons simulate observations and log-variances up to h - 1 and return
/// the h-step conditional Gaussian.
PredictiveMixture predictive_mixture(const PosteriorDraws& draws, const Eigen::VectorXd& x_next, int horizon, Rng& rng,
                                     const ForecastOptions& options = {});

/// log N(y; mean, cov), throwing NumericalError if cov is not positive definite.
double log_normal_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Log of the mixture density at y_obs restricted to `subset` (Gaussian
/// marginalisation of every component). An empty subset means all variables.
double log_predictive_likelihood(const PredictiveMixture& mix, const Eigen::VectorXd& y_obs,
                                 const std::vector<int>& subset = {});

// ---------------------------------------------------------------------------
// Recursive out-of-sample exercise.

struct ModelEntry {
  std::string name;
  VarSpec spec;  // M is taken from the selected variables
  SamplerConfig sampler;
  std::vector<std::string> variables;  // empty: every series of the dataset
};

struct VariableSubset {
  std::string label;
  std::vector<std::string> variables;  // empty: every variable of the model
};

struct ExerciseConfig {
  int first_window_end = 0;  // row index (inclusive) of the first estimation sample end
  int last_window_end = 0;
  std::vector<int> horizons{1};
  std::vector<VariableSubset> subsets{{"all", {}}};
  McmcConfig mcmc;
  ForecastOptions forecast;
  int threads = 0;
};

/// Log predictive likelihoods for one (horizon, subset): rows are windows,
/// labelled by the date of the predicted observation; failed cells are NaN
/// with a message in `errors`.
struct ScorePanel {
  int horizon = 1;
  std::string subset = "all";
  std::vector<std::string> labels;
  std::vector<std::string> models;
  Eigen::MatrixXd lpl;
  std::vector<std::string> errors;

  int model_index(const std::string& name) const;
};

/// Every (window, model) task fits the model once on rows [0, window end]
/// and scores all horizons and subsets. Task seeds are derived from
/// mcmc.seed and the task index, so results do not depend on thread count.
std::vector<ScorePanel> recursive_exercise(const Dataset& data, const std::vector<ModelEntry>& models,
                                           const ExerciseConfig& cfg);

/// Prefix sums of each model's scores, optionally minus the benchmark's.
Eigen::MatrixXd cumulative_scores(const ScorePanel& panel, const std::optional<std::string>& benchmark = {});

/// CSV with header "window,<model>,..." and one row per window.
void write_score_panel_csv(const ScorePanel& panel, const std::string& path);
ScorePanel read_score_panel_csv(const std::string& path);
void write_cumulative_csv(const ScorePanel& panel, const std::string& path,
                          const std::optional<std::string>& benchmark = {});

}  // namespace bvarsv
