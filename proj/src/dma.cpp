#include "bvarsv/dma.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "bvarsv/distributions.hpp"
#include "bvarsv/error.hpp"

namespace bvarsv {

namespace {

void normalize_log(std::vector<double>& lw) {
  const double z = log_sum_exp(lw);
  for (double& v : lw) v -= z;
}

}  // namespace

DmaResult dma_run(const ScorePanel& panel, double alpha, const std::optional<Eigen::VectorXd>& init) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("dma: alpha must lie in [0, 1]");
  const int W = static_cast<int>(panel.lpl.rows());
  const int N = static_cast<int>(panel.lpl.cols());
  if (N == 0) throw DataError("dma: panel has no models");
  if (!panel.lpl.allFinite()) throw DataError("dma: panel contains non-finite scores");

  std::vector<double> lw(N, -std::log(static_cast<double>(N)));
  if (init) {
    if (init->size() != N) throw DimensionError("dma: initial weights have the wrong length");
    if ((init->array() < 0.0).any() || !(init->sum() > 0.0)) throw DomainError("dma: invalid initial weights");
    for (int i = 0; i < N; ++i) lw[i] = std::log((*init)(i));
    normalize_log(lw);
  }

  DmaResult r;
  r.alpha = alpha;
  r.labels = panel.labels;
  r.models = panel.models;
  r.predicted.resize(W, N);
  r.updated.resize(W, N);
  r.log_score.resize(W);
  const double log_floor = std::log(kDmaWeightFloor);
  std::vector<double> joint(N);
  for (int t = 0; t < W; ++t) {
    for (int i = 0; i < N; ++i) lw[i] = alpha * std::max(lw[i], log_floor);
    normalize_log(lw);
    for (int i = 0; i < N; ++i) {
      r.predicted(t, i) = std::exp(lw[i]);
      joint[i] = lw[i] + panel.lpl(t, i);
    }
    r.log_score(t) = log_sum_exp(joint);
    for (int i = 0; i < N; ++i) {
      lw[i] = joint[i] - r.log_score(t);
      r.updated(t, i) = std::exp(lw[i]);
    }
  }
  return r;
}

ScorePanel with_dma_column(const ScorePanel& panel, const DmaResult& dma, const std::string& name) {
  if (dma.log_score.size() != panel.lpl.rows()) throw DimensionError("with_dma_column: window count mismatch");
  ScorePanel out = panel;
  out.models.push_back(name);
  out.lpl.conservativeResize(Eigen::NoChange, panel.lpl.cols() + 1);
  out.lpl.col(panel.lpl.cols()) = dma.log_score;
  return out;
}

void write_dma_weights_csv(const DmaResult& r, const std::string& path, bool updated) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open " + path + " for writing");
  const Eigen::MatrixXd& w = updated ? r.updated : r.predicted;
  std::fprintf(f, "window");
  for (const auto& m : r.models) std::fprintf(f, ",%s", m.c_str());
  std::fprintf(f, "\n");
  for (int t = 0; t < w.rows(); ++t) {
    std::fprintf(f, "%s", r.labels[static_cast<std::size_t>(t)].c_str());
    for (int i = 0; i < w.cols(); ++i) std::fprintf(f, ",%.17g", w(t, i));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_dma_score_csv(const DmaResult& r, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open " + path + " for writing");
  std::fprintf(f, "window,dma_lpl,cumulative\n");
  double cum = 0.0;
  for (int t = 0; t < r.log_score.size(); ++t) {
    cum += r.log_score(t);
    std::fprintf(f, "%s,%.17g,%.17g\n", r.labels[static_cast<std::size_t>(t)].c_str(), r.log_score(t), cum);
  }
  std::fclose(f);
}

}  // namespace bvarsv
