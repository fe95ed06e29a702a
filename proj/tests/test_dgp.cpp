#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "bvarsv/dgp.hpp"
#include "bvarsv/error.hpp"

using namespace bvarsv;

namespace {

int nonzeros(const Eigen::MatrixXd& m) { return static_cast<int>((m.array() != 0.0).count()); }

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  return s;
}

int line_count(const std::string& path) {
  std::ifstream in(path);
  std::string s;
  int n = 0;
  while (std::getline(in, s)) ++n;
  return n;
}

}  // namespace

TEST_CASE("zero inclusion probabilities give a zero system") {
  auto s = DgpScenario::sparse(4, 50);
  s.own_prob = s.cross_prob = s.l_prob = 0.0;
  Rng rng(3);
  const auto d = generate_dgp(s, rng);
  CHECK(nonzeros(d.truth.phi) == 0);
  CHECK(nonzeros(d.truth.factor.l) == 0);
  CHECK(d.truth.redraws == 0);
  CHECK(d.data.T() == 50);
  CHECK(d.data.M() == 4);
}

TEST_CASE("sparse inclusion counts match the binomial expectation") {
  // M = 5: 5 own at 0.8 and 20 cross at 0.1, six nonzeros on average.
  const auto s = DgpScenario::sparse(5, 10);
  Rng rng(11);
  const int n = 1000;
  double own = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto phi = draw_dgp_coefficients(s, rng);
    const int diag = static_cast<int>((phi.diagonal().array() != 0.0).count());
    own += diag;
    cross += nonzeros(phi) - diag;
  }
  own /= n;
  cross /= n;
  CHECK(std::abs(own - 4.0) < 4.0 * std::sqrt(5 * 0.8 * 0.2 / n));
  CHECK(std::abs(cross - 2.0) < 4.0 * std::sqrt(20 * 0.1 * 0.9 / n));
  CHECK(std::abs(own + cross - 6.0) < 4.0 * std::sqrt(2.6 / n));
}

TEST_CASE("every emitted system is stable") {
  for (auto s : {DgpScenario::sparse(7, 20), DgpScenario::dense(7, 20)}) {
    s.mu_own = 0.6;  // push towards the boundary so that rejection happens
    for (int i = 0; i < 40; ++i) {
      Rng rng(derive_seed(5, i));
      const auto d = generate_dgp(s, rng);
      CHECK(companion_stable(d.truth.phi, d.truth.spec));
    }
  }
}

TEST_CASE("unstable scenario exhausts the redraw budget") {
  auto s = DgpScenario::sparse(3, 20);
  s.own_prob = 1.0;
  s.mu_own = 2.0;
  s.sd_own = 0.0;
  s.max_redraws = 5;
  Rng rng(1);
  CHECK_THROWS_AS(generate_dgp(s, rng), NumericalError);
}

TEST_CASE("same seed, same sample") {
  const auto s = DgpScenario::dense(4, 60);
  Rng a(99), b(99), c(100);
  const auto x = generate_dgp(s, a), y = generate_dgp(s, b), z = generate_dgp(s, c);
  CHECK(x.data.Y == y.data.Y);
  CHECK(x.truth.phi == y.truth.phi);
  CHECK(x.data.Y != z.data.Y);
}

TEST_CASE("dense cross-lag coefficients are small next to own lags") {
  const auto s = DgpScenario::dense(6, 10);
  Rng rng(21);
  double own = 0.0, cross = 0.0;
  int n_own = 0, n_cross = 0;
  for (int i = 0; i < 200; ++i) {
    const auto phi = draw_dgp_coefficients(s, rng);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) {
        if (phi(r, c) == 0.0) continue;
        (r == c ? own : cross) += std::abs(phi(r, c));
        ++(r == c ? n_own : n_cross);
      }
  }
  CHECK(cross / n_cross < 0.2 * own / n_own);
  CHECK(static_cast<double>(n_cross) / (200 * 30) == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("SV parameters lie in their ranges and residuals standardise") {
  auto s = DgpScenario::sparse(3, 3000);
  Rng rng(8);
  const auto d = generate_dgp(s, rng);
  for (const auto& sv : d.truth.sv) {
    CHECK(sv.mu == -10.0);
    CHECK(sv.rho >= 0.85);
    CHECK(sv.rho <= 0.98);
    CHECK(sv.sigma >= 0.1);
    CHECK(sv.sigma <= 0.3);
  }
  // Independent route: xi_t = A (y_t - y_{t-1} Phi), xi_j / exp(h_j / 2) ~ N(0, 1).
  const Eigen::MatrixXd A = d.truth.factor.A(3);
  const auto& Y = d.data.Y;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3), sq = Eigen::VectorXd::Zero(3);
  const int n = s.T - 1;
  for (int t = 1; t < s.T; ++t) {
    const Eigen::VectorXd eps = (Y.row(t) - Y.row(t - 1) * d.truth.phi).transpose();
    const Eigen::VectorXd xi = A * eps;
    for (int j = 0; j < 3; ++j) {
      const double z = xi[j] * std::exp(-0.5 * d.truth.H(t, j));
      sum[j] += z;
      sq[j] += z * z;
    }
  }
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(sum[j] / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sq[j] / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(d.truth.H.col(j).mean() + 10.0) < 1.0);
  }
}

TEST_CASE("scenario validation") {
  auto s = DgpScenario::sparse(3, 10);
  s.cross_prob = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = DgpScenario::sparse(0, 10);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = DgpScenario::sparse(3, 10);
  s.rho_hi = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(dgp_kind_from_string("dense") == DgpKind::Dense);
  CHECK_THROWS_AS(dgp_kind_from_string("medium"), ConfigError);
}

TEST_CASE("the comparison uses eleven named priors") {
  const auto p = study_priors();
  REQUIRE(p.size() == 11);
  CHECK(p[0].name == "DL");
  CHECK(p[0].phi.dl.a_is_inverse_K);
  CHECK(p[3].phi.family == PriorFamily::HM);
  CHECK(p[7].phi.grouping == Grouping::SemiGlobal);
  CHECK(p[8].phi.r2d2.b == 0.5);
  CHECK(study_priors(true).back().name == "FLAT");
  CHECK(study_prior("SSVS_bl").phi.ssvs.c1 == 10.0);
  CHECK_THROWS_AS(study_prior("LASSO"), ConfigError);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("small study: medians, failures and CSV layout") {
  SimStudyConfig cfg;
  cfg.scenarios = {DgpScenario::sparse(2, 40), DgpScenario::dense(2, 40)};
  auto broken = DgpScenario::sparse(2, 40);
  broken.own_prob = 1.0;
  broken.mu_own = 3.0;
  broken.sd_own = 0.0;
  broken.max_redraws = 2;
  cfg.scenarios.push_back(broken);
  cfg.priors = {study_prior("HM"), study_prior("R2D2")};
  cfg.replications = 1;
  cfg.mcmc = McmcConfig{60, 30, 1, 1};
  cfg.threads = 1;
  const auto cells = run_sim_study(cfg);
  REQUIRE(cells.size() == 6);
  for (int i = 0; i < 4; ++i) {
    CHECK(cells[i].errors.empty());
    REQUIRE(cells[i].mae.size() == 1);
    CHECK(cells[i].median_mae == cells[i].mae[0]);
    CHECK(cells[i].median_rmspd >= cells[i].median_mae);
    CHECK(std::isfinite(cells[i].median_rmspd));
  }
  CHECK(cells[0].scenario == "sparse");
  CHECK(cells[2].scenario == "dense");
  for (int i = 4; i < 6; ++i) {
    CHECK(cells[i].errors.size() == 1);
    CHECK(std::isnan(cells[i].median_mae));
  }

  const auto again = run_sim_study(cfg);
  CHECK(again[1].median_mae == cells[1].median_mae);

  const auto dir = std::filesystem::temp_directory_path() / "bvarsv_test_dgp";
  std::filesystem::create_directories(dir);
  const std::string lp = (dir / "long.csv").string(), wp = (dir / "wide.csv").string();
  write_sim_study_csv(cells, lp);
  write_sim_study_table_csv(cells, wp);
  CHECK(first_line(lp) == "scenario,M,T,prior,median_mae,median_rmspd,replications,failed");
  CHECK(line_count(lp) == 7);
  CHECK(first_line(wp) == "M,prior,MAE.sparse.T40,MAE.dense.T40,RMSPD.sparse.T40,RMSPD.dense.T40");
  CHECK(line_count(wp) == 3);

  Rng rng(4);
  const auto d = generate_dgp(DgpScenario::sparse(2, 15), rng);
  const std::string dp = (dir / "data.csv").string(), tp = (dir / "truth.csv").string();
  write_dgp_csv(d, dp, tp);
  CHECK(line_count(dp) == 16);
  CHECK(first_line(tp) == "parameter,value");
  CHECK(line_count(tp) == 1 + 4 + 1 + 6 + 2);
  std::filesystem::remove_all(dir);
}
