#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bvarsv/diagnostics.hpp"
#include "bvarsv/dgp.hpp"
#include "bvarsv/dma.hpp"
#include "bvarsv/error.hpp"
#include "bvarsv/io.hpp"
#include "bvarsv/sampler.hpp"

namespace py = pybind11;
using namespace bvarsv;

namespace {

Eigen::VectorXd map_density(const std::string& prior, const Eigen::VectorXd& phi, bool log) {
  const PriorConfig cfg = parse_prior_config(prior);
  Eigen::VectorXd out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    out[i] = log ? log_marginal_density(cfg, phi[i]) : marginal_density(cfg, phi[i]);
  return out;
}

py::dict estimate(const Eigen::MatrixXd& Y, int p, bool intercept, const std::string& prior,
                  const std::string& l_prior, int draws, int burnin, int thin, std::uint64_t seed,
                  std::vector<std::string> names) {
  Dataset data = make_dataset(Y);
  if (!names.empty()) {
    if (static_cast<int>(names.size()) != data.M()) throw DimensionError("estimate: one name per column expected");
    data.names = std::move(names);
  }
  SamplerConfig sc;
  sc.phi_prior = parse_prior_config(prior, "prior");
  sc.l_prior = parse_prior_config(l_prior, "l_prior");
  PosteriorDraws d;
  {
    py::gil_scoped_release release;
    d = run_mcmc(data, VarSpec(data.M(), p, intercept), sc, McmcConfig{draws, burnin, thin, seed});
  }
  py::dict out;
  out["phi"] = d.phi;
  out["l"] = d.l;
  out["sv"] = d.sv;
  out["h_last"] = d.h_last;
  out["hyper"] = d.hyper;
  out["hyper_names"] = d.hyper_names;
  out["phi_names"] = phi_parameter_names(d.spec, d.names);
  out["l_names"] = l_parameter_names(d.spec.M, d.names);
  out["K"] = d.spec.K();
  return out;
}

py::dict dma(const Eigen::MatrixXd& lpl, double alpha, std::optional<Eigen::VectorXd> init) {
  ScorePanel panel;
  panel.lpl = lpl;
  for (Eigen::Index t = 0; t < lpl.rows(); ++t) panel.labels.push_back("w" + std::to_string(t + 1));
  for (Eigen::Index m = 0; m < lpl.cols(); ++m) panel.models.push_back("m" + std::to_string(m + 1));
  const DmaResult r = dma_run(panel, alpha, init);
  py::dict out;
  out["predicted"] = r.predicted;
  out["updated"] = r.updated;
  out["log_score"] = r.log_score;
  return out;
}

py::dict simulate(const std::string& kind, int M, int T, std::uint64_t seed) {
  const DgpScenario s = dgp_kind_from_string(kind) == DgpKind::Sparse ? DgpScenario::sparse(M, T)
                                                                       : DgpScenario::dense(M, T);
  Rng rng(seed);
  const DgpSample d = generate_dgp(s, rng);
  py::dict out;
  out["Y"] = d.data.Y;
  out["phi"] = d.truth.phi;
  out["l"] = d.truth.factor.l;
  out["H"] = d.truth.H;
  return out;
}

py::dict load(const std::string& path, std::vector<std::string> variables,
              std::map<std::string, std::string> transforms, const std::string& default_transform, bool quarterly) {
  DataConfig c;
  c.path = path;
  c.variables = std::move(variables);
  for (const auto& [k, v] : transforms) c.transforms[k] = transform_from_string(v);
  c.default_transform = transform_from_string(default_transform);
  c.quarterly_dates = quarterly;
  const Dataset d = load_dataset(c);
  py::dict out;
  out["Y"] = d.Y;
  out["names"] = d.names;
  out["dates"] = d.dates;
  return out;
}

std::vector<std::string> run(const std::string& command, const std::string& config, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_run_config(config);
  if (seed) override_seed(cfg, *seed);
  py::gil_scoped_release release;
  if (command == "estimate") return run_estimate(cfg);
  if (command == "forecast") return run_forecast(cfg);
  if (command == "simulate") return run_simulate(cfg);
  if (command == "prior-diagnose") return run_prior_diagnose(cfg);
  if (command == "dma") return run_dma(cfg);
  throw ConfigError("command", "unknown command '" + command + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian VARs with stochastic volatility and shrinkage priors";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("hoyer", [](const Eigen::VectorXd& x) { return hoyer(x); }, py::arg("x"));
  m.def("marginal_density", [](const std::string& prior, const Eigen::VectorXd& phi) {
    return map_density(prior, phi, false);
  }, py::arg("prior"), py::arg("phi"));
  m.def("log_marginal_density", [](const std::string& prior, const Eigen::VectorXd& phi) {
    return map_density(prior, phi, true);
  }, py::arg("prior"), py::arg("phi"));
  m.def("prior_hoyer", [](const std::string& prior, int n, int sims, std::uint64_t seed, int threads) {
    const PriorConfig cfg = parse_prior_config(prior);
    py::gil_scoped_release release;
    return prior_hoyer(cfg, n, sims, seed, threads);
  }, py::arg("prior"), py::arg("n"), py::arg("sims"), py::arg("seed") = 42, py::arg("threads") = 1);

  m.def("estimate", &estimate, py::arg("Y"), py::arg("p") = 1, py::arg("intercept") = true,
        py::arg("prior") = "{}", py::arg("l_prior") = "{}", py::arg("draws") = 10000, py::arg("burnin") = 5000,
        py::arg("thin") = 10, py::arg("seed") = 42, py::arg("names") = std::vector<std::string>{});
  m.def("dma", &dma, py::arg("lpl"), py::arg("alpha"), py::arg("init") = py::none());
  m.def("simulate", &simulate, py::arg("kind"), py::arg("M"), py::arg("T"), py::arg("seed") = 42);
  m.def("load_dataset", &load, py::arg("path"), py::arg("variables") = std::vector<std::string>{},
        py::arg("transforms") = std::map<std::string, std::string>{},
        py::arg("default_transform") = "log-difference", py::arg("quarterly") = true);
  m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("seed") = py::none());
  m.def("config_hash", [](const std::string& path) { return config_hash(load_run_config(path)); }, py::arg("config"));
  m.def("study_priors", [](bool with_flat) {
    std::vector<std::string> names;
    for (const auto& p : study_priors(with_flat)) names.push_back(p.name);
    return names;
  }, py::arg("with_flat") = false);
}
