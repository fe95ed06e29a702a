#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "bvarsv/error.hpp"
#include "bvarsv/sampler.hpp"
#include "joint_geweke.hpp"
#include "phi_oracle.hpp"
#include "stat_helpers.hpp"

using namespace bvarsv;

namespace {

Dataset simulated_var(int T, const Eigen::MatrixXd& phi, const VarSpec& spec, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(T, spec.M);
  for (int t = spec.p; t < T; ++t) {
    const Eigen::VectorXd x = next_regressor(Y.topRows(t), spec);
    for (int j = 0; j < spec.M; ++j) Y(t, j) = x.dot(phi.col(j)) + sd * rng.normal();
  }
  return make_dataset(Y);
}

SamplerConfig flat_config() {
  SamplerConfig cfg;
  cfg.phi_prior.family = PriorFamily::FLAT;
  cfg.l_prior.family = PriorFamily::FLAT;
  return cfg;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("bvarsv_" + name)).string();
}

}  // namespace

TEST_CASE("triangular draw matches the dense joint-Gaussian oracle; the uncorrected draw does not") {
  const auto c = testutil::phi_oracle_case();
  const auto good = testutil::compare_with_oracle(c, 100000, true, 11);
  INFO("corrected mean z " << good.max_mean_z << " cov z " << good.max_cov_z);
  CHECK(good.within(3.0));
  const auto bad = testutil::compare_with_oracle(c, 100000, false, 11);
  INFO("uncorrected mean z " << bad.max_mean_z << " cov z " << bad.max_cov_z);
  CHECK_FALSE(bad.within(3.0));
}

TEST_CASE("M = 1: heteroskedastic regression moments") {
  Rng rng(5);
  const int T = 30, K = 2;
  Eigen::MatrixXd X(T, K), Y(T, 1), H(T, 1);
  for (int t = 0; t < T; ++t) {
    X(t, 0) = 1.0;
    X(t, 1) = rng.normal();
    H(t, 0) = 0.5 * std::sin(t);
    Y(t, 0) = 0.3 - 0.7 * X(t, 1) + std::exp(0.5 * H(t, 0)) * rng.normal();
  }
  Eigen::MatrixXd V(K, 1);
  V << 4.0, 0.25;
  const Eigen::VectorXd w = (-H.col(0)).array().exp().matrix();
  Eigen::MatrixXd P = X.transpose() * w.asDiagonal() * X;
  P.diagonal() += V.col(0).cwiseInverse();
  const Eigen::MatrixXd S = P.inverse();
  const Eigen::VectorXd m = S * X.transpose() * w.cwiseProduct(Y.col(0));

  const int n = 40000;
  Eigen::MatrixXd draws(n, K);
  for (int r = 0; r < n; ++r)
    draws.row(r) = draw_phi_triangular(Y, X, Eigen::MatrixXd::Zero(K, 1), CovFactor::zeros(1), H, V, rng)
                       .col(0)
                       .transpose();
  const Eigen::VectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd cen = draws.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = cen.transpose() * cen / (n - 1.0);
  for (int k = 0; k < K; ++k) {
    CHECK(std::abs(mean(k) - m(k)) < 4.0 * std::sqrt(S(k, k) / n));
    CHECK(cov(k, k) == doctest::Approx(S(k, k)).epsilon(0.03));
  }
}

TEST_CASE("l = 0: equations decouple and the correction is inert") {
  auto c = testutil::phi_oracle_case(9);
  c.factor = CovFactor::zeros(2);
  Rng r1(3), r2(3);
  for (int k = 0; k < 50; ++k) {
    const Eigen::MatrixXd a = draw_phi_triangular(c.Y, c.X, c.phi_in, c.factor, c.H, c.V, r1, true);
    const Eigen::MatrixXd b = draw_phi_triangular(c.Y, c.X, c.phi_in, c.factor, c.H, c.V, r2, false);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  // With a diagonal transform the exact conditional factorises by column.
  const auto ok = testutil::compare_with_oracle(c, 50000, true, 4);
  CHECK(ok.within(4.0));
}

TEST_CASE("draw_phi_triangular argument checks") {
  auto c = testutil::phi_oracle_case();
  Rng rng(1);
  Eigen::MatrixXd badV = c.V;
  badV(0, 0) = 0.0;
  CHECK_THROWS_AS(draw_phi_triangular(c.Y, c.X, c.phi_in, c.factor, c.H, badV, rng), DomainError);
  CHECK_THROWS_AS(draw_phi_triangular(c.Y, c.X.leftCols(1), c.phi_in, c.factor, c.H, c.V, rng), DimensionError);
  Eigen::MatrixXd badH = c.H;
  badH(2, 1) = std::nan("");
  CHECK_THROWS_AS(draw_phi_triangular(c.Y, c.X, c.phi_in, c.factor, badH, c.V, rng), DomainError);
}

TEST_CASE("draw_l: M = 1 has no free elements") {
  Rng rng(1);
  const auto f = draw_l(Eigen::MatrixXd::Ones(10, 1), Eigen::MatrixXd::Zero(10, 1), Eigen::VectorXd(0), rng);
  CHECK(f.l.size() == 0);
}

TEST_CASE("draw_l: uncorrelated residuals concentrate at zero") {
  Rng rng(8);
  const int T = 50000;
  Eigen::MatrixXd E(T, 2);
  for (int t = 0; t < T; ++t) E.row(t) << rng.normal(), rng.normal();
  const Eigen::MatrixXd H = Eigen::MatrixXd::Zero(T, 2);
  std::vector<double> d;
  for (int r = 0; r < 2000; ++r) d.push_back(draw_l(E, H, Eigen::VectorXd::Constant(1, 10.0), rng).l(0));
  const auto m = testutil::moments(d);
  CHECK(std::abs(m.mean) < 0.02);
  CHECK(std::sqrt(m.var) < 0.01);
}

TEST_CASE("draw_l: recovery of a known factor at T = 2000") {
  Rng rng(12);
  const int T = 2000, M = 3;
  const CovFactor truth(Eigen::Vector3d(0.5, -0.8, 0.3));
  const Eigen::MatrixXd Ainv = truth.A(M).inverse();
  Eigen::MatrixXd H(T, M), E(T, M);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd xi(M);
    for (int j = 0; j < M; ++j) {
      H(t, j) = -1.0 + 0.8 * std::sin(0.01 * t * (j + 1));
      xi(j) = std::exp(0.5 * H(t, j)) * rng.normal();
    }
    E.row(t) = (Ainv * xi).transpose();
  }
  const int n = 4000;
  Eigen::MatrixXd d(n, 3);
  for (int r = 0; r < n; ++r) d.row(r) = draw_l(E, H, Eigen::VectorXd::Constant(3, 10.0), rng).l.transpose();
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd col = d.col(k);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1));
    INFO("element " << k << " mean " << mean << " sd " << sd);
    CHECK(std::abs(mean - truth.l(k)) < 3.0 * sd);
  }
}

TEST_CASE("run_mcmc: minimal chain") {
  const VarSpec spec(2, 1, true);
  const Eigen::MatrixXd phi = (Eigen::MatrixXd(3, 2) << 0.5, 0.1, 0.0, 0.3, 0.2, -0.1).finished();
  const Dataset data = simulated_var(60, phi, spec, 0.5, 3);
  McmcConfig mc;
  mc.draws = 1;
  mc.burnin = 0;
  mc.thin = 1;
  const auto d = run_mcmc(data, spec, SamplerConfig{}, mc);
  CHECK(d.size() == 1);
  CHECK(d.phi.cols() == spec.n());
  CHECK(d.l.cols() == 1);
  CHECK(d.sv.cols() == 6);
  CHECK(d.h_last.cols() == 2);
  CHECK(d.hyper.cols() == static_cast<int>(d.hyper_names.size()));
  CHECK(d.phi.allFinite());
}

TEST_CASE("run_mcmc: config validation") {
  const VarSpec spec(1, 1, false);
  const Dataset data = make_dataset(Eigen::MatrixXd::Random(30, 1));
  McmcConfig mc;
  mc.draws = 5;
  mc.thin = 10;
  CHECK_THROWS_AS(run_mcmc(data, spec, SamplerConfig{}, mc), ConfigError);
  mc.draws = 0;
  CHECK_THROWS_AS(run_mcmc(data, spec, SamplerConfig{}, mc), ConfigError);
}

TEST_CASE("run_mcmc: FLAT prior reproduces OLS on homoskedastic data") {
  const VarSpec spec(2, 1, true);
  const Eigen::MatrixXd phi = (Eigen::MatrixXd(3, 2) << 0.5, 0.2, -0.1, 0.4, 0.3, -0.2).finished();
  const Dataset data = simulated_var(401, phi, spec, 1.0, 21);
  McmcConfig mc;
  mc.draws = 3000;
  mc.burnin = 500;
  mc.thin = 1;
  mc.seed = 8;
  const auto d = run_mcmc(data, spec, flat_config(), mc);
  const Design des = build_design(data, spec);
  const Eigen::MatrixXd ols = (des.X.transpose() * des.X).ldlt().solve(des.X.transpose() * des.Y);
  const Eigen::VectorXd ols_vec = ols.reshaped();
  for (int j = 0; j < spec.n(); ++j) {
    const Eigen::VectorXd col = d.phi.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
    INFO("coefficient " << j << " mean " << mean << " ols " << ols_vec(j) << " sd " << sd);
    CHECK(std::abs(mean - ols_vec(j)) < 3.0 * sd);
  }
}

TEST_CASE("run_mcmc is bit-identical for a fixed seed; draws round-trip") {
  const VarSpec spec(3, 2, true);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(7, 3);
  phi(0, 0) = 0.5;
  phi(1, 1) = 0.4;
  phi(2, 2) = 0.3;
  const Dataset data = simulated_var(80, phi, spec, 0.7, 5);
  McmcConfig mc;
  mc.draws = 60;
  mc.burnin = 20;
  mc.thin = 3;
  mc.seed = 99;
  for (PriorFamily f : {PriorFamily::R2D2, PriorFamily::DL, PriorFamily::SSVS, PriorFamily::HM}) {
    SamplerConfig cfg;
    cfg.phi_prior.family = f;
    cfg.phi_prior.grouping = Grouping::SemiGlobal;
    const auto a = run_mcmc(data, spec, cfg, mc);
    const auto b = run_mcmc(data, spec, cfg, mc);
    CHECK(a.size() == 20);
    CHECK(a.phi == b.phi);
    CHECK(a.l == b.l);
    CHECK(a.sv == b.sv);
    CHECK(a.h_last == b.h_last);
    CHECK(a.hyper == b.hyper);

    const std::string path = temp_path("draws.bin");
    write_draws(a, path);
    const auto c = read_draws(path);
    CHECK(c.phi == a.phi);
    CHECK(c.l == a.l);
    CHECK(c.sv == a.sv);
    CHECK(c.h_last == a.h_last);
    CHECK(c.hyper == a.hyper);
    CHECK(c.hyper_names == a.hyper_names);
    CHECK(c.names == a.names);
    CHECK(c.spec.K() == a.spec.K());
    CHECK(c.rho_accepts == a.rho_accepts);
    std::filesystem::remove(path);
  }
}

TEST_CASE("summary export") {
  PosteriorDraws d;
  d.spec = VarSpec(1, 1, false);
  d.names = {"gdp"};
  d.phi.resize(5, 1);
  d.phi << 1, 2, 3, 4, 5;
  d.l.resize(5, 0);
  d.sv = Eigen::MatrixXd::Zero(5, 3);
  d.h_last = Eigen::MatrixXd::Zero(5, 1);
  d.hyper.resize(5, 0);
  const auto rows = summarize(d);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].parameter == "phi.gdp.gdp.L1");
  CHECK(rows[0].mean == 3.0);
  CHECK(rows[0].median == 3.0);
  CHECK(rows[0].q25 == 2.0);
  CHECK(rows[0].q05 == doctest::Approx(1.2));
  CHECK(rows[0].sd == doctest::Approx(std::sqrt(2.5)));
  const std::string path = temp_path("summary.csv");
  write_summary_csv(rows, path);
  const auto back = read_summary_csv(path);
  REQUIRE(back.size() == rows.size());
  CHECK(back[0].q05 == rows[0].q05);
  CHECK(back[3].parameter == "sv.sigma.gdp");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_draws(path), DataError);
}

TEST_CASE("a failing step reports iteration and step") {
  const VarSpec spec(1, 1, false);
  Design des;
  des.X = Eigen::MatrixXd::Ones(10, 1);
  des.Y = Eigen::MatrixXd::Ones(10, 1);
  GibbsSampler g(des, spec, SamplerConfig{});
  g.state().paths[0].h(3) = std::nan("");
  Rng rng(1);
  try {
    g.sweep(rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("iteration 0, step phi") != std::string::npos);
  }
}
