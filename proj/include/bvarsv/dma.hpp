#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bvarsv/forecast.hpp"

namespace bvarsv {

/// Weight trajectories, one row per window. `predicted` holds the weights
/// used to combine the window's predictive likelihoods, `updated` the
/// weights after observing it.
struct DmaResult {
  double alpha = 1.0;
  std::vector<std::string> labels;
  std::vector<std::string> models;
  Eigen::MatrixXd predicted;
  Eigen::MatrixXd updated;
  Eigen::VectorXd log_score;  // log sum_i w_pred_i PL_i per window
};

/// Weights below this are raised to it before the forgetting exponent.
inline constexpr double kDmaWeightFloor = 1e-300;

/// Forgetting recursion on log predictive likelihoods, kept in log space.
/// `init` defaults to uniform weights.
DmaResult dma_run(const ScorePanel& panel, double alpha, const std::optional<Eigen::VectorXd>& init = {});

/// The panel with an extra column holding the DMA log score.
ScorePanel with_dma_column(const ScorePanel& panel, const DmaResult& dma, const std::string& name = "DMA");

void write_dma_weights_csv(const DmaResult& r, const std::string& path, bool updated = false);
void write_dma_score_csv(const DmaResult& r, const std::string& path);

}  // namespace bvarsv
