// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// `acceptance 4 8` runs the listed criteria only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bvarsv/dgp.hpp"
#include "bvarsv/diagnostics.hpp"
#include "bvarsv/distributions.hpp"
#include "bvarsv/dma.hpp"
#include "bvarsv/forecast.hpp"
#include "bvarsv/io.hpp"
#include "bvarsv/parallel.hpp"
#include "dma_oracle.hpp"
#include "forecast_oracle.hpp"
#include "joint_geweke.hpp"
#include "marginal_oracle.hpp"
#include "mixture_oracle.hpp"
#include "phi_oracle.hpp"
#include "stat_helpers.hpp"
#include "sv_geweke.hpp"

using namespace bvarsv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome prior_sparseness() {
  Outcome o;
  const int threads = resolve_threads(0);
  for (const auto& s : hoyer_scenarios()) {
    const auto v = prior_hoyer(s.cfg, 1000, 10000, 2024, threads);
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    o.check(std::abs(m - s.reference) <= 0.02,
            s.scenario + "/" + s.prior + fmt(" mean %.4f", m) + fmt(" (reference %.2f)", s.reference));
  }
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome getting_it_right() {
  Outcome o;
  auto judge = [&](const std::string& label, const testutil::GewekeReport& rep) {
    o.check(rep.count() >= 20 && rep.max_abs_z() < 4.0,
            label + fmt(": %.0f statistics, max |z| %.2f", rep.count(), rep.max_abs_z()));
  };
  for (const auto& c : testutil::geweke_cases()) judge(c.label, testutil::run_joint_geweke(c.cfg, {}));
  judge("SV block", testutil::run_sv_geweke(100000, 9));
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome triangular_oracle() {
  Outcome o;
  const auto c = testutil::phi_oracle_case();
  const auto good = testutil::compare_with_oracle(c, 100000, true, 11);
  o.check(good.within(3.0), fmt("corrected: max mean z %.2f, max cov z %.2f", good.max_mean_z, good.max_cov_z));
  const auto bad = testutil::compare_with_oracle(c, 100000, false, 11);
  o.check(!bad.within(3.0), fmt("uncorrected: max mean z %.2f, max cov z %.2f", bad.max_mean_z, bad.max_cov_z));
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome gig_grid() {
  struct Point {
    const char* regime;
    GigParams g;
  };
  const Point grid[] = {
      {"R2D2 local", {-0.46, 2.0, 0.5}},      {"R2D2 local", {0.3, 0.2, 5.0}},
      {"R2D2 local", {0.5, 1.0, 0.02}},       {"R2D2 global", {-11.5, 2.0, 2.0}},
      {"R2D2 global", {-11.5, 0.5, 40.0}},    {"DL local", {-0.5, 1.0, 1.0}},
      {"DL local", {-0.8, 1.0, 2.0}},         {"DL global", {-20.0, 1.0, 10.0}},
      {"DL global", {-20.0, 1.0, 60.0}},      {"HM own", {-4.99, 0.02, 0.5}},
      {"HM cross", {-9.99, 0.02, 2.0}},       {"HM cross", {-9.99, 0.02, 1e-6}},
  };
  Outcome o;
  std::uint64_t seed = 400;
  for (const auto& p : grid) {
    Rng rng(seed++);
    double s1 = 0.0, s2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double x = sample_gig(p.g, rng);
      s1 += x;
      s2 += x * x;
    }
    const double e1 = testutil::gig_moment(p.g.theta, p.g.psi, p.g.chi, 1);
    const double e2 = testutil::gig_moment(p.g.theta, p.g.psi, p.g.chi, 2);
    const double r1 = s1 / n / e1 - 1.0, r2 = s2 / n / e2 - 1.0;
    std::ostringstream os;
    os << p.regime << " (" << p.g.theta << ", " << p.g.psi << ", " << p.g.chi << ")"
       << fmt(": rel. error mean %.2e, second %.2e", r1, r2);
    o.check(std::abs(r1) < 0.01 && std::abs(r2) < 0.01, os.str());
  }
  return o;
}

// 5 -------------------------------------------------------------------------

PriorConfig family(PriorFamily f) {
  PriorConfig p;
  p.family = f;
  return p;
}

Outcome marginals() {
  Outcome o;
  PriorConfig dl = family(PriorFamily::DL);
  dl.dl.a = 0.51;
  PriorConfig hm = family(PriorFamily::HM);
  hm.hm.c1 = hm.hm.d1 = 0.3;
  PriorConfig ss = family(PriorFamily::SSVS);
  ss.ssvs.tau0 = 0.1;
  ss.ssvs.tau1 = 16.0;
  ss.ssvs.p = 0.5;
  PriorConfig r2 = family(PriorFamily::R2D2);
  r2.r2d2.a_pi = 0.26;
  r2.r2d2.b = 0.5;

  for (const auto& [name, cfg] : {std::pair{"DL", dl}, std::pair{"HM", hm}}) {
    auto f = [&](double t) { return marginal_density(cfg, t); };
    const double mass = testutil::total_mass(f);
    o.check(std::abs(mass - 1.0) <= 1e-3, std::string(name) + fmt(" total mass %.6f", mass));
    const auto x = std::string(name) == "DL" ? testutil::dl_mixture_draws(0.51, 1000000, 1)
                                             : testutil::hm_mixture_draws(0.3, 0.3, 1000000, 2);
    // Distance on a 1000-level quantile grid, plus its resolution.
    const double ks = testutil::ks_grid_distance(x, f, 1000) + 1e-3;
    o.check(ks < 0.01, std::string(name) + fmt(" KS vs mixture simulation %.4f", ks));
  }
  for (double b : {0.1, 0.5, 1.0}) {
    const double s = (log_r2d2_marginal(0.26, b, 500) - log_r2d2_marginal(0.26, b, 50)) / std::log(10.0);
    const double target = -(1 + 2 * b);
    o.check(std::abs(s / target - 1.0) < 0.1, fmt("R2D2 b = %.1f tail slope %.3f", b, s) + fmt(" (%.1f)", target));
  }
  // Local log-log slopes at 1e-4: poles of order 1 - a (DL), 1 - 2 a_pi
  // (R2D2), 1 - 2 c (HM); SSVS is bounded.
  auto slope = [](const PriorConfig& c) {
    return (log_marginal_density(c, 1e-4) - log_marginal_density(c, 1e-5)) / std::log(10.0);
  };
  const double sd = slope(dl), sr = slope(r2), sh = slope(hm), sss = slope(ss);
  o.check(std::abs(sd + 0.49) < 0.03 && std::abs(sr + 0.48) < 0.03 && std::abs(sh + 0.4) < 0.03 &&
              std::abs(sss) < 1e-6,
          fmt("slopes DL %.3f R2D2 %.3f", sd, sr) + fmt(" HM %.3f SSVS %.1e", sh, sss));
  o.check(sd < sh && sr < sh && sh < sss, "ordering DL, R2D2 < HM < SSVS");
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome induced_prior() {
  Outcome o;
  const double sd = std::sqrt(10.0);
  for (int s = 0; s < 10; ++s) {
    Rng rng(derive_seed(606, s));
    const auto ip = induced_prior_experiment(3, 10.0, 100000, rng);
    const Eigen::VectorXd c = ip.column_pooled(0);
    const std::vector<double> v(c.data(), c.data() + c.size());
    const double p = testutil::ks_pvalue(v, [&](double x) { return testutil::normal_cdf(x / sd); });
    const auto& k = ip.excess_kurtosis;
    o.check(p > 0.01 && k[0] < k[1] && k[1] < k[2],
            "seed " + std::to_string(s) + fmt(": KS p %.3f", p) + fmt(", kurtosis %.2f < %.2f", k[0], k[1]) +
                fmt(" < %.2f", k[2]));
  }
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome simulation_study() {
  Outcome o;
  SimStudyConfig cfg;
  cfg.scenarios = {DgpScenario::sparse(5, 50), DgpScenario::sparse(5, 250), DgpScenario::dense(5, 50),
                   DgpScenario::dense(5, 250)};
  cfg.priors = study_priors();
  cfg.replications = 5;
  cfg.mcmc = McmcConfig{2000, 1000, 1, 2024};
  cfg.seed = 2024;
  const auto cells = run_sim_study(cfg);
  std::map<std::tuple<std::string, int, std::string>, const StudyCell*> at;
  for (const auto& c : cells) at[{c.scenario, c.T, c.prior}] = &c;
  for (const auto& c : cells) std::printf("  %-6s T=%-3d %-8s MAE %.4f RMSPD %.4f\n", c.scenario.c_str(), c.T,
                                          c.prior.c_str(), c.median_mae, c.median_rmspd);

  for (const char* sc : {"sparse", "dense"}) {
    int down = 0;
    std::string bad;
    for (const auto& p : cfg.priors) {
      const auto* lo = at[{sc, 50, p.name}];
      const auto* hi = at[{sc, 250, p.name}];
      if (hi->median_mae < lo->median_mae && hi->median_rmspd < lo->median_rmspd)
        ++down;
      else
        bad += " " + p.name;
    }
    o.check(bad.empty(), std::string("(a) ") + sc + ": MAE and RMSPD fall with T for " + std::to_string(down) + "/" +
                             std::to_string(cfg.priors.size()) + " priors" + (bad.empty() ? "" : ", not" + bad));

    std::string worst;
    double worst_mae = -1.0;
    for (const auto& p : cfg.priors) {
      const double m = at[{sc, 50, p.name}]->median_mae;
      if (!(m <= worst_mae)) worst_mae = m, worst = p.name;
    }
    o.check(worst == "SSVS_bl", std::string("(b) ") + sc + " T=50 worst median MAE: " + worst);
  }
  std::string best;
  double best_rmspd = 0.0;
  for (const auto& p : cfg.priors) {
    const double r = at[{"dense", 250, p.name}]->median_rmspd;
    if (best.empty() || !(r >= best_rmspd)) best_rmspd = r, best = p.name;
  }
  o.check(best == "HM", "(c) dense T=250 best median RMSPD: " + best + fmt(" (%.4f)", best_rmspd));
  return o;
}

// 8 -------------------------------------------------------------------------

Dataset toy_data(int T, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd Y(T, 3);
  Y.row(0).setZero();
  for (int t = 1; t < T; ++t)
    for (int j = 0; j < 3; ++j) Y(t, j) = 0.5 * Y(t - 1, j) + 0.3 * rng.normal();
  Dataset d = make_dataset(Y);
  d.names = {"gdp", "cpi", "ffr"};
  return d;
}

Outcome forecast_scoring() {
  Outcome o;
  const auto mix = testutil::synthetic_mixture();
  Rng rng(3);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Vector3d y(2.0 * rng.normal(), 2.0 * rng.normal(), 2.0 * rng.normal());
    worst = std::max(worst, std::abs(log_predictive_likelihood(mix, y) -
                                     static_cast<double>(testutil::brute_force_lpl(mix, y, {0, 1, 2}))));
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(log_predictive_likelihood(mix, y, {j}) -
                                       static_cast<double>(testutil::brute_force_lpl(mix, y, {j}))));
  }
  o.check(worst < 1e-10, fmt("joint and single-variable LPL vs brute force: max error %.1e", worst));

  const auto d = testutil::synthetic_draws(200, 5);
  const Eigen::VectorXd x = (Eigen::VectorXd(5) << 0.5, -0.3, 0.2, 0.1, 1.0).finished();
  Rng frng(6);
  ForecastOptions opt;
  opt.paths_per_draw = 50;
  const auto m4 = predictive_mixture(d, x, 4, frng, opt);
  const auto c = testutil::compare_step_mean(m4, testutil::simulate_paths(d, x, 4, 100000, 7));
  o.check(c.max_z() < 4.0, fmt("4-step mixture mean vs 1e5 paths: max |z| %.2f", c.max_z()));

  ModelEntry a, b;
  a.name = "r2d2";
  a.spec = b.spec = VarSpec(3, 1, true);
  b.name = "hm";
  b.sampler.phi_prior.family = PriorFamily::HM;
  ExerciseConfig ex;
  ex.first_window_end = 40;
  ex.last_window_end = 44;
  ex.horizons = {1, 2};
  ex.subsets = {{"all", {}}, {"gdp", {"gdp"}}};
  ex.mcmc = McmcConfig{200, 100, 1, 8};
  const auto panels = recursive_exercise(toy_data(50, 12), {a, b}, ex);
  double self = 0.0;
  bool finite = true;
  for (const auto& p : panels) {
    finite = finite && p.lpl.allFinite();
    for (const auto& m : p.models)
      self = std::max(self, cumulative_scores(p, m).col(p.model_index(m)).cwiseAbs().maxCoeff());
  }
  o.check(finite && self == 0.0, std::to_string(panels.size()) + fmt(" toy panels, self-benchmark |cum. LPL| %.1e", self));
  return o;
}

// 9 -------------------------------------------------------------------------

Outcome dma_checks() {
  Outcome o;
  const auto pl = testutil::hand_panel_pl();
  const auto panel = testutil::panel_from_pl(pl);

  const Eigen::Vector3d init(0.2, 0.5, 0.3);
  const auto bma = dma_run(panel, 1.0, init);
  std::vector<double> prod = {0.2, 0.5, 0.3};
  double e1 = 0.0;
  for (int t = 0; t < 5; ++t) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (prod[i] *= pl[t][i]);
    for (int i = 0; i < 3; ++i) e1 = std::max(e1, std::abs(bma.updated(t, i) - prod[i] / s));
  }
  o.check(e1 < 1e-12, fmt("alpha = 1 vs cumulative-product BMA: max error %.1e", e1));

  ScorePanel sym;
  sym.models = {"a", "b", "c"};
  sym.lpl.resize(6, 3);
  for (int t = 0; t < 6; ++t) {
    sym.labels.push_back(std::to_string(t));
    sym.lpl.row(t).setConstant(-2.0 + 0.4 * t);
  }
  double e2 = 0.0;
  for (double alpha : {0.0, 0.5, 0.99, 1.0}) {
    const auto r = dma_run(sym, alpha);
    e2 = std::max({e2, (r.predicted.array() - 1.0 / 3).abs().maxCoeff(), (r.updated.array() - 1.0 / 3).abs().maxCoeff()});
  }
  // Permuting the models permutes the weights.
  ScorePanel perm = panel;
  perm.lpl.col(0).swap(perm.lpl.col(2));
  const auto r0 = dma_run(panel, 0.9), r1 = dma_run(perm, 0.9);
  double e3 = 0.0;
  for (int t = 0; t < 5; ++t)
    for (int i = 0; i < 3; ++i) e3 = std::max(e3, std::abs(r0.updated(t, i) - r1.updated(t, 2 - i)));
  o.check(e2 < 1e-15 && e3 < 1e-15, fmt("symmetric input: max deviation %.1e, permutation %.1e", e2, e3));

  double e4 = 0.0;
  for (double alpha : {0.99, 0.9, 0.5}) {
    const auto r = dma_run(panel, alpha);
    const auto ref = testutil::direct_dma(pl, alpha, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (int t = 0; t < 5; ++t) {
      e4 = std::max(e4, std::abs(r.log_score(t) - ref.score[t]));
      for (int i = 0; i < 3; ++i)
        e4 = std::max({e4, std::abs(r.predicted(t, i) - ref.predicted[t][i]),
                       std::abs(r.updated(t, i) - ref.updated[t][i])});
    }
  }
  o.check(e4 < 1e-12, fmt("3 x 5 hand panel vs direct recursion: max error %.1e", e4));
  return o;
}

// 10 ------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "bvarsv_acceptance_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> z(0.0, 0.01);
    std::ofstream out(dir / "toy.csv");
    out.precision(17);
    out << "date,GDP,CPI,RATE\n";
    double a = 100, b = 50;
    for (int t = 0; t < 36; ++t) {
      a *= std::exp(0.005 + z(eng));
      b *= std::exp(0.004 + z(eng));
      out << format_quarter(1990 * 4 + t) << "," << a << "," << b << "," << 2.0 + 100 * z(eng) << "\n";
    }
  }
  const std::string config = R"({
    "data": {"path": "toy.csv", "transforms": {"RATE": "level"}},
    "model": {"name": "r2d2", "prior": {"family": "R2D2"}},
    "mcmc": {"draws": 60, "burnin": 30, "thin": 1},
    "forecast": {"first_window_end": 30, "last_window_end": 33, "horizons": [1, 2],
                 "models": [{"name": "r2d2"}, {"name": "dl", "prior": {"family": "DL"}},
                            {"name": "hm", "prior": {"family": "HM"}}],
                 "benchmark": "hm"},
    "dma": {"alphas": [0.99, 1.0]},
    "output": "out", "seed": 77
  })";
  const RunConfig cfg = parse_run_config(config, dir.string());
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir / "out");
    run_estimate(cfg);
    run_forecast(cfg);
    run_dma(cfg);
    runs.push_back(snapshot(dir / "out"));
  }
  std::size_t differ = 0;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) ++differ;
  }
  o.check(runs[0].size() == runs[1].size() && differ == 0 && runs[0].size() > 5,
          std::to_string(runs[0].size()) + " output files, " + std::to_string(differ) + " differ");
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"prior Hoyer sparseness, 10000 x 1000", prior_sparseness},
      {"getting it right, every prior family and the SV block", getting_it_right},
      {"corrected triangular draw vs dense Gaussian oracle", triangular_oracle},
      {"GIG moments on a 12-point grid, 1e6 draws", gig_grid},
      {"marginal prior densities", marginals},
      {"induced prior on Phi, M = 3", induced_prior},
      {"scaled-down simulation study", simulation_study},
      {"forecast scoring", forecast_scoring},
      {"dynamic model averaging", dma_checks},
      {"pipeline determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& n : o.notes) std::printf("  %s\n", n.c_str());
    std::printf("%s %2d %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
