#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bvarsv/core_model.hpp"
#include "bvarsv/dgp.hpp"
#include "bvarsv/forecast.hpp"
#include "bvarsv/priors.hpp"
#include "bvarsv/sampler.hpp"

namespace bvarsv {

std::string to_string(Transform t);
/// "log-difference" (also "dlog") or "level".
Transform transform_from_string(const std::string& s);

/// Quarter index year * 4 + (q - 1) of a "YYYY:Qn" label.
int parse_quarter(const std::string& label);
std::string format_quarter(int index);

struct DataConfig {
  std::string path;
  std::vector<std::string> variables;              // empty: every column
  std::map<std::string, Transform> transforms;     // per-series overrides
  Transform default_transform = Transform::LogDifference;
  bool quarterly_dates = true;                     // false: any row label
};

/// Reads `date,<series>...`, keeps the selected series, trims leading and
/// trailing rows with empty cells and applies the transforms. If any series
/// is log-differenced the first row is dropped from every series.
Dataset load_dataset(const DataConfig& cfg);

// ---------------------------------------------------------------------------
// Run configuration (JSON, schema in docs/config.md)

struct ModelSection {
  std::string name = "model";
  int p = 1;
  bool intercept = true;
  PriorConfig phi_prior;
  PriorConfig l_prior;
  std::vector<std::string> variables;  // empty: every loaded series
};

struct ForecastSection {
  std::string first_window_end;  // date label or row index of the transformed data
  std::string last_window_end;
  std::vector<int> horizons{1};
  std::vector<VariableSubset> subsets{{"all", {}}};
  std::vector<ModelSection> models;  // empty: the top-level model alone
  std::optional<std::string> benchmark;
  ForecastOptions options;
  std::vector<double> dma_alphas;  // DMA on every panel when non-empty
};

struct SimulateSection {
  std::vector<DgpScenario> scenarios;
  std::vector<std::string> priors;  // study prior names; empty: all eleven
  int replications = 20;
  McmcConfig mcmc{2000, 1000, 1, 42};
  bool write_data = true;
};

struct DensityEntry {
  std::string label;
  PriorConfig prior;
};

struct DiagnoseSection {
  double grid_lo = -1.0, grid_hi = 1.0;
  int grid_points = 401;
  std::vector<DensityEntry> densities;  // empty: no density grid
  int hoyer_sims = 1000;                // 0: skip the sparseness table
  int hoyer_n = 1000;
  int induced_M = 3;                    // 0: skip the induced-prior experiment
  double induced_variance = 10.0;
  int induced_draws = 100000;
};

struct DmaSection {
  std::string panel;  // empty: the first score panel written by `forecast`
  std::vector<double> alphas{0.99};
};

struct RunConfig {
  std::optional<DataConfig> data;
  ModelSection model;
  SvPriors sv_priors;
  SvOptions sv_options;
  McmcConfig mcmc;
  ForecastSection forecast;
  SimulateSection simulate;
  DiagnoseSection diagnose;
  DmaSection dma;
  std::string output = "output";
  std::uint64_t seed = 42;
  int threads = 0;
  std::string canonical;  // sorted-key JSON of the effective configuration

  SamplerConfig sampler(const ModelSection& m) const;
};

/// Parses JSON text. Relative paths are resolved against `base_dir`. Every
/// error is a ConfigError whose field is the JSON path, e.g. "model.prior.r2d2.b".
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);
/// Replaces the seed everywhere it is used and refreshes `canonical`.
void override_seed(RunConfig& cfg, std::uint64_t seed);
/// A single prior object in the schema of `model.prior`; errors are reported
/// under `field`.
PriorConfig parse_prior_config(const std::string& text, const std::string& field = "prior");

std::uint64_t fnv1a64(const std::string& s);
/// 16 hex digits of fnv1a64(canonical).
std::string config_hash(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Pipeline steps behind the CLI subcommands. Each creates the output tree
// (draws/, summaries/, scores/, dma/, diagnostics/, data/) and config.lock,
// and returns the files it wrote, relative to the output directory.

std::vector<std::string> prepare_output(const RunConfig& cfg);
std::vector<std::string> run_estimate(const RunConfig& cfg);
std::vector<std::string> run_forecast(const RunConfig& cfg);
std::vector<std::string> run_simulate(const RunConfig& cfg);
std::vector<std::string> run_prior_diagnose(const RunConfig& cfg);
std::vector<std::string> run_dma(const RunConfig& cfg);

/// Score panel file name written by `forecast`: lpl_h<h>_<subset>.csv.
std::string score_panel_name(int horizon, const std::string& subset);

}  // namespace bvarsv
