#include "bvarsv/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bvarsv/diagnostics.hpp"
#include "bvarsv/dma.hpp"
#include "bvarsv/error.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bvarsv {

std::string to_string(Transform t) { return t == Transform::Level ? "level" : "log-difference"; }

Transform transform_from_string(const std::string& s) {
  if (s == "log-difference" || s == "dlog") return Transform::LogDifference;
  if (s == "level") return Transform::Level;
  throw ConfigError("transform", "unknown transform '" + s + "', expected log-difference or level");
}

int parse_quarter(const std::string& label) {
  // YYYY:Qn
  const bool ok = label.size() == 7 && label[4] == ':' && label[5] == 'Q' && label[6] >= '1' && label[6] <= '4' &&
                  std::isdigit(static_cast<unsigned char>(label[0])) &&
                  std::isdigit(static_cast<unsigned char>(label[1])) &&
                  std::isdigit(static_cast<unsigned char>(label[2])) &&
                  std::isdigit(static_cast<unsigned char>(label[3]));
  if (!ok) throw DataError("unparseable date '" + label + "', expected YYYY:Qn");
  return std::stoi(label.substr(0, 4)) * 4 + (label[6] - '1');
}

std::string format_quarter(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d:Q%d", index / 4, index % 4 + 1);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  std::string out = s.substr(a, b - a);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset load_dataset(const DataConfig& cfg) {
  std::ifstream in(cfg.path);
  if (!in) throw DataError("cannot open data file " + cfg.path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(cfg.path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 2) throw DataError(cfg.path + ": header needs a date column and at least one series");
  const std::size_t width = header.size();

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != width)
      throw DataError(cfg.path + ":" + std::to_string(lineno) + ": ragged row with " + std::to_string(cells.size()) +
                      " fields, header has " + std::to_string(width));
    labels.push_back(cells[0]);
    std::vector<double> v(width - 1);
    for (std::size_t j = 1; j < width; ++j) {
      if (cells[j].empty() || cells[j] == "NA" || cells[j] == "NaN") {
        v[j - 1] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      char* end = nullptr;
      v[j - 1] = std::strtod(cells[j].c_str(), &end);
      if (end == cells[j].c_str() || *end != '\0')
        throw DataError(cfg.path + ":" + std::to_string(lineno) + ": non-numeric value '" + cells[j] + "' in " +
                        header[j]);
    }
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw DataError(cfg.path + ": no data rows");

  if (cfg.quarterly_dates) {
    int prev = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const int q = parse_quarter(labels[t]);
      if (t > 0 && q != prev + 1)
        throw DataError(cfg.path + ": dates are not consecutive quarters at " + labels[t]);
      prev = q;
    }
  }

  std::vector<int> cols;
  if (cfg.variables.empty()) {
    for (std::size_t j = 1; j < width; ++j) cols.push_back(static_cast<int>(j) - 1);
  } else {
    for (std::size_t k = 0; k < cfg.variables.size(); ++k) {
      const auto it = std::find(header.begin() + 1, header.end(), cfg.variables[k]);
      if (it == header.end())
        throw ConfigError("data.variables[" + std::to_string(k) + "]",
                          "series '" + cfg.variables[k] + "' not found in " + cfg.path);
      cols.push_back(static_cast<int>(it - header.begin()) - 1);
    }
  }
  for (const auto& [name, t] : cfg.transforms) {
    (void)t;
    if (std::find(header.begin() + 1, header.end(), name) == header.end())
      throw ConfigError("data.transforms." + name, "series not found in " + cfg.path);
  }

  // Common sample: leading and trailing incomplete rows are dropped.
  const int T0 = static_cast<int>(rows.size());
  auto complete = [&](int t) {
    for (int c : cols)
      if (std::isnan(rows[t][c])) return false;
    return true;
  };
  int first = 0, last = T0 - 1;
  while (first < T0 && !complete(first)) ++first;
  while (last >= first && !complete(last)) --last;
  if (first > last) throw DataError(cfg.path + ": no row has every selected series");
  for (int t = first; t <= last; ++t)
    if (!complete(t)) throw DataError(cfg.path + ": missing value inside the sample at " + labels[t]);

  Dataset d;
  bool any_dlog = false;
  for (int c : cols) {
    const std::string& name = header[c + 1];
    const auto it = cfg.transforms.find(name);
    const Transform tr = it == cfg.transforms.end() ? cfg.default_transform : it->second;
    d.names.push_back(name);
    d.transforms.push_back(tr);
    if (tr == Transform::LogDifference) {
      any_dlog = true;
      for (int t = first; t <= last; ++t)
        if (!(rows[t][c] > 0.0))
          throw DataError(cfg.path + ": nonpositive value " + std::to_string(rows[t][c]) + " in " + name + " at " +
                          labels[t] + " under log-difference");
    }
  }
  const int start = first + (any_dlog ? 1 : 0);
  if (start > last) throw DataError(cfg.path + ": no observations left after differencing");
  d.Y.resize(last - start + 1, static_cast<Eigen::Index>(cols.size()));
  for (int t = start; t <= last; ++t) {
    d.dates.push_back(labels[t]);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int c = cols[k];
      d.Y(t - start, static_cast<Eigen::Index>(k)) = d.transforms[k] == Transform::Level
                                                         ? rows[t][c]
                                                         : std::log(rows[t][c]) - std::log(rows[t - 1][c]);
    }
  }
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Rethrows a ConfigError raised by a validator with the JSON path in front.
[[noreturn]] void rethrow_at(const std::string& path, const ConfigError& e) {
  const std::string what = e.what();
  const std::string msg = what.substr(std::min(what.size(), e.field().size() + 2));
  throw ConfigError(join(path, e.field()), msg);
}

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string field(const std::string& key) const { return join(path_, key); }
  Node child(const std::string& key) { return Node(raw(key), field(key)); }

  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    out = as_double(j_.at(key), field(key));
  }
  void get(const std::string& key, int& out) {
    if (!has(key)) return;
    out = as_int(j_.at(key), field(key));
  }
  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = j_.at(key).get<bool>();
  }
  void get(const std::string& key, std::string& out) {
    if (!has(key)) return;
    out = as_string(j_.at(key), field(key));
  }
  void get(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    if (j_.at(key).is_null())
      out.reset();
    else
      out = as_double(j_.at(key), field(key));
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    if (!has(key)) return;
    out.clear();
    const auto& a = array(key);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_string(a[i], at(field(key), i)));
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    const auto& a = array(key);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_double(a[i], at(field(key), i)));
  }
  void get(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    out.clear();
    const auto& a = array(key);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_int(a[i], at(field(key), i)));
  }
  const json& array(const std::string& key) {
    const json& a = raw(key);
    if (!a.is_array()) throw ConfigError(field(key), "expected an array");
    return a;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

  static double as_double(const json& v, const std::string& f) {
    if (!v.is_number()) throw ConfigError(f, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(f, "must be finite");
    return x;
  }
  static int as_int(const json& v, const std::string& f) {
    if (!v.is_number_integer()) throw ConfigError(f, "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      throw ConfigError(f, "integer out of range");
    return static_cast<int>(x);
  }
  static std::string as_string(const json& v, const std::string& f) {
    if (!v.is_string()) throw ConfigError(f, "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(double v, const std::string& f) {
  if (!(v > 0.0)) throw ConfigError(f, "must be positive");
}

PriorConfig parse_prior(Node n) {
  PriorConfig p;
  if (n.has("preset")) {
    const std::string name = Node::as_string(n.raw("preset"), n.field("preset"));
    try {
      p = study_prior(name).phi;
    } catch (const ConfigError&) {
      throw ConfigError(n.field("preset"), "unknown preset '" + name + "'");
    }
  }
  if (n.has("family")) {
    const std::string s = Node::as_string(n.raw("family"), n.field("family"));
    try {
      p.family = prior_family_from_string(s);
    } catch (const ConfigError& e) {
      rethrow_at(n.path(), e);
    }
  }
  if (n.has("grouping")) {
    const std::string s = Node::as_string(n.raw("grouping"), n.field("grouping"));
    try {
      p.grouping = grouping_from_string(s);
    } catch (const ConfigError& e) {
      rethrow_at(n.path(), e);
    }
  }
  if (n.has("r2d2")) {
    Node r = n.child("r2d2");
    r.get("b", p.r2d2.b);
    r.get("b_lo", p.r2d2.b_lo);
    r.get("b_hi", p.r2d2.b_hi);
    r.get("b_points", p.r2d2.b_points);
    r.get("a_pi", p.r2d2.a_pi);
    r.finish();
    if (p.r2d2.b) positive(*p.r2d2.b, r.field("b"));
    if (p.r2d2.a_pi) positive(*p.r2d2.a_pi, r.field("a_pi"));
    positive(p.r2d2.b_lo, r.field("b_lo"));
    if (!(p.r2d2.b_hi >= p.r2d2.b_lo)) throw ConfigError(r.field("b_hi"), "must not be below b_lo");
    if (p.r2d2.b_points < 1) throw ConfigError(r.field("b_points"), "must be at least 1");
  }
  if (n.has("dl")) {
    Node d = n.child("dl");
    if (d.has("a")) {
      const json& a = d.raw("a");
      if (a.is_string()) {
        if (a.get<std::string>() != "1/K") throw ConfigError(d.field("a"), "expected a number, null or \"1/K\"");
        p.dl.a.reset();
        p.dl.a_is_inverse_K = true;
      } else if (a.is_null()) {
        p.dl.a.reset();
        p.dl.a_is_inverse_K = false;
      } else {
        p.dl.a = Node::as_double(a, d.field("a"));
        p.dl.a_is_inverse_K = false;
        positive(*p.dl.a, d.field("a"));
      }
    }
    d.get("a_points", p.dl.a_points);
    d.finish();
    if (p.dl.a_points < 1) throw ConfigError(d.field("a_points"), "must be at least 1");
  }
  if (n.has("ssvs")) {
    Node s = n.child("ssvs");
    s.get("c0", p.ssvs.c0);
    s.get("c1", p.ssvs.c1);
    s.get("p", p.ssvs.p);
    s.get("s1", p.ssvs.s1);
    s.get("s2", p.ssvs.s2);
    s.get("tau0", p.ssvs.tau0);
    s.get("tau1", p.ssvs.tau1);
    s.finish();
    positive(p.ssvs.c0, s.field("c0"));
    positive(p.ssvs.c1, s.field("c1"));
    positive(p.ssvs.s1, s.field("s1"));
    positive(p.ssvs.s2, s.field("s2"));
    if (p.ssvs.p && !(*p.ssvs.p > 0.0 && *p.ssvs.p < 1.0)) throw ConfigError(s.field("p"), "must lie in (0, 1)");
    if (p.ssvs.tau0) positive(*p.ssvs.tau0, s.field("tau0"));
    if (p.ssvs.tau1) positive(*p.ssvs.tau1, s.field("tau1"));
  }
  if (n.has("hm")) {
    Node h = n.child("hm");
    h.get("c1", p.hm.c1);
    h.get("d1", p.hm.d1);
    h.get("c2", p.hm.c2);
    h.get("d2", p.hm.d2);
    h.get("ratio_of_variances", p.hm.ratio_of_variances);
    h.finish();
    positive(p.hm.c1, h.field("c1"));
    positive(p.hm.d1, h.field("d1"));
    positive(p.hm.c2, h.field("c2"));
    positive(p.hm.d2, h.field("d2"));
  }
  n.get("flat_variance", p.flat_variance);
  n.get("intercept_variance", p.intercept_variance);
  positive(p.flat_variance, n.field("flat_variance"));
  positive(p.intercept_variance, n.field("intercept_variance"));
  n.finish();
  return p;
}

McmcConfig parse_mcmc(Node n, McmcConfig m) {
  n.get("draws", m.draws);
  n.get("burnin", m.burnin);
  n.get("thin", m.thin);
  n.finish();
  try {
    m.validate();
  } catch (const ConfigError& e) {
    const std::string f = e.field().rfind("mcmc.", 0) == 0 ? e.field().substr(5) : e.field();
    const std::string what = e.what();
    throw ConfigError(n.field(f), what.substr(std::min(what.size(), e.field().size() + 2)));
  }
  return m;
}

void parse_model(Node n, ModelSection& m) {
  n.get("name", m.name);
  n.get("p", m.p);
  n.get("intercept", m.intercept);
  n.get("variables", m.variables);
  if (n.has("prior")) m.phi_prior = parse_prior(n.child("prior"));
  if (n.has("l_prior")) m.l_prior = parse_prior(n.child("l_prior"));
  n.finish();
  if (m.p < 1) throw ConfigError(n.field("p"), "must be at least 1");
  if (m.name.empty()) throw ConfigError(n.field("name"), "must not be empty");
}

std::string window_bound(Node& n, const std::string& key) {
  if (!n.has(key)) return {};
  const json& v = n.raw(key);
  if (v.is_number_integer()) {
    const int i = Node::as_int(v, n.field(key));
    if (i < 0) throw ConfigError(n.field(key), "row index must be nonnegative");
    return std::to_string(i);
  }
  return Node::as_string(v, n.field(key));
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

void alphas_ok(const std::vector<double>& a, const std::string& f) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] >= 0.0 && a[i] <= 1.0)) throw ConfigError(at(f, i), "forgetting factor must lie in [0, 1]");
}

RunConfig parse_json(const json& root, const std::string& base_dir) {
  RunConfig c;
  Node n(root, "");
  if (n.has("data")) {
    Node d = n.child("data");
    DataConfig dc;
    d.get("path", dc.path);
    if (dc.path.empty()) throw ConfigError(d.field("path"), "required");
    dc.path = resolve(base_dir, dc.path);
    d.get("variables", dc.variables);
    if (d.has("transforms")) {
      const json& t = d.raw("transforms");
      if (!t.is_object()) throw ConfigError(d.field("transforms"), "expected an object of series: code");
      for (auto it = t.begin(); it != t.end(); ++it) {
        const std::string f = d.field("transforms") + "." + it.key();
        try {
          dc.transforms[it.key()] = transform_from_string(Node::as_string(it.value(), f));
        } catch (const ConfigError& e) {
          if (e.field() == f) throw;
          throw ConfigError(f, std::string(e.what()).substr(e.field().size() + 2));
        }
      }
    }
    if (d.has("default_transform")) {
      try {
        dc.default_transform = transform_from_string(Node::as_string(d.raw("default_transform"),
                                                                     d.field("default_transform")));
      } catch (const ConfigError& e) {
        throw ConfigError(d.field("default_transform"), std::string(e.what()).substr(e.field().size() + 2));
      }
    }
    std::string dates = "quarterly";
    d.get("dates", dates);
    if (dates != "quarterly" && dates != "any")
      throw ConfigError(d.field("dates"), "expected \"quarterly\" or \"any\"");
    dc.quarterly_dates = dates == "quarterly";
    d.finish();
    c.data = dc;
  }
  if (n.has("model")) parse_model(n.child("model"), c.model);
  if (n.has("sv")) {
    Node s = n.child("sv");
    s.get("mu_mean", c.sv_priors.mu_mean);
    s.get("mu_sd", c.sv_priors.mu_sd);
    s.get("rho_a", c.sv_priors.rho_a);
    s.get("rho_b", c.sv_priors.rho_b);
    s.get("b_sigma", c.sv_priors.b_sigma);
    s.get("interweave", c.sv_options.interweave);
    s.get("homoskedastic", c.sv_options.homoskedastic);
    s.get("homoskedastic_shape", c.sv_options.homo.shape);
    s.get("homoskedastic_scale", c.sv_options.homo.scale);
    s.finish();
    positive(c.sv_priors.mu_sd, s.field("mu_sd"));
    positive(c.sv_priors.rho_a, s.field("rho_a"));
    positive(c.sv_priors.rho_b, s.field("rho_b"));
    positive(c.sv_priors.b_sigma, s.field("b_sigma"));
    positive(c.sv_options.homo.shape, s.field("homoskedastic_shape"));
    positive(c.sv_options.homo.scale, s.field("homoskedastic_scale"));
  }
  if (n.has("mcmc")) c.mcmc = parse_mcmc(n.child("mcmc"), c.mcmc);

  if (n.has("forecast")) {
    Node f = n.child("forecast");
    ForecastSection& fs_ = c.forecast;
    fs_.first_window_end = window_bound(f, "first_window_end");
    fs_.last_window_end = window_bound(f, "last_window_end");
    f.get("horizons", fs_.horizons);
    if (fs_.horizons.empty()) throw ConfigError(f.field("horizons"), "must not be empty");
    for (std::size_t i = 0; i < fs_.horizons.size(); ++i)
      if (fs_.horizons[i] < 1) throw ConfigError(at(f.field("horizons"), i), "must be at least 1");
    if (f.has("subsets")) {
      fs_.subsets.clear();
      const json& a = f.array("subsets");
      std::set<std::string> labels;
      for (std::size_t i = 0; i < a.size(); ++i) {
        Node s(a[i], at(f.field("subsets"), i));
        VariableSubset vs;
        s.get("label", vs.label);
        s.get("variables", vs.variables);
        s.finish();
        if (vs.label.empty()) throw ConfigError(s.field("label"), "required");
        if (!labels.insert(vs.label).second) throw ConfigError(s.field("label"), "duplicate label");
        fs_.subsets.push_back(vs);
      }
      if (fs_.subsets.empty()) throw ConfigError(f.field("subsets"), "must not be empty");
    }
    if (f.has("models")) {
      const json& a = f.array("models");
      std::set<std::string> names;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ModelSection m = c.model;
        m.name.clear();
        Node mn(a[i], at(f.field("models"), i));
        if (!mn.has("name")) throw ConfigError(mn.field("name"), "required");
        parse_model(mn, m);
        if (!names.insert(m.name).second) throw ConfigError(mn.field("name"), "duplicate model name");
        fs_.models.push_back(m);
      }
    }
    if (f.has("benchmark")) fs_.benchmark = Node::as_string(f.raw("benchmark"), f.field("benchmark"));
    f.get("paths_per_draw", fs_.options.paths_per_draw);
    f.get("stable_only", fs_.options.stable_only);
    f.get("dma_alphas", fs_.dma_alphas);
    f.finish();
    if (fs_.options.paths_per_draw < 1) throw ConfigError(f.field("paths_per_draw"), "must be at least 1");
    alphas_ok(fs_.dma_alphas, f.field("dma_alphas"));
  }

  if (n.has("simulate")) {
    Node s = n.child("simulate");
    SimulateSection& ss = c.simulate;
    if (s.has("scenarios")) {
      const json& a = s.array("scenarios");
      for (std::size_t i = 0; i < a.size(); ++i) {
        Node sn(a[i], at(s.field("scenarios"), i));
        std::string kind = "sparse";
        sn.get("kind", kind);
        DgpScenario sc;
        try {
          sc = dgp_kind_from_string(kind) == DgpKind::Sparse ? DgpScenario::sparse(5, 100) : DgpScenario::dense(5, 100);
        } catch (const ConfigError& e) {
          rethrow_at(sn.path(), e);
        }
        sn.get("M", sc.M);
        sn.get("T", sc.T);
        sn.get("p", sc.p);
        sn.get("warmup", sc.warmup);
        sn.get("max_redraws", sc.max_redraws);
        sn.get("own_prob", sc.own_prob);
        sn.get("cross_prob", sc.cross_prob);
        sn.get("l_prob", sc.l_prob);
        sn.get("mu_own", sc.mu_own);
        sn.get("sd_own", sc.sd_own);
        sn.get("mu_cross", sc.mu_cross);
        sn.get("sd_cross", sc.sd_cross);
        sn.get("mu_l", sc.mu_l);
        sn.get("sd_l", sc.sd_l);
        sn.get("sv_mu", sc.sv_mu);
        sn.get("rho_lo", sc.rho_lo);
        sn.get("rho_hi", sc.rho_hi);
        sn.get("sigma_lo", sc.sigma_lo);
        sn.get("sigma_hi", sc.sigma_hi);
        sn.finish();
        try {
          sc.validate();
        } catch (const ConfigError& e) {
          rethrow_at(sn.path(), e);
        }
        ss.scenarios.push_back(sc);
      }
    }
    s.get("priors", ss.priors);
    for (std::size_t i = 0; i < ss.priors.size(); ++i) {
      try {
        study_prior(ss.priors[i]);
      } catch (const ConfigError&) {
        throw ConfigError(at(s.field("priors"), i), "unknown study prior '" + ss.priors[i] + "'");
      }
    }
    s.get("replications", ss.replications);
    if (ss.replications < 1) throw ConfigError(s.field("replications"), "must be at least 1");
    if (s.has("mcmc")) ss.mcmc = parse_mcmc(s.child("mcmc"), ss.mcmc);
    s.get("write_data", ss.write_data);
    s.finish();
  }

  if (n.has("diagnose")) {
    Node d = n.child("diagnose");
    DiagnoseSection& ds = c.diagnose;
    if (d.has("grid")) {
      Node g = d.child("grid");
      g.get("lo", ds.grid_lo);
      g.get("hi", ds.grid_hi);
      g.get("points", ds.grid_points);
      g.finish();
      if (!(ds.grid_hi > ds.grid_lo)) throw ConfigError(g.field("hi"), "must exceed lo");
      if (ds.grid_points < 2) throw ConfigError(g.field("points"), "must be at least 2");
    }
    if (d.has("densities")) {
      const json& a = d.array("densities");
      for (std::size_t i = 0; i < a.size(); ++i) {
        Node e(a[i], at(d.field("densities"), i));
        DensityEntry de;
        e.get("label", de.label);
        if (de.label.empty()) throw ConfigError(e.field("label"), "required");
        if (!e.has("prior")) throw ConfigError(e.field("prior"), "required");
        de.prior = parse_prior(e.child("prior"));
        e.finish();
        ds.densities.push_back(de);
      }
    }
    d.get("hoyer_sims", ds.hoyer_sims);
    d.get("hoyer_n", ds.hoyer_n);
    d.get("induced_M", ds.induced_M);
    d.get("induced_variance", ds.induced_variance);
    d.get("induced_draws", ds.induced_draws);
    d.finish();
    if (ds.hoyer_sims < 0) throw ConfigError(d.field("hoyer_sims"), "must be nonnegative");
    if (ds.hoyer_n < 2) throw ConfigError(d.field("hoyer_n"), "must be at least 2");
    if (ds.induced_M < 0) throw ConfigError(d.field("induced_M"), "must be nonnegative");
    positive(ds.induced_variance, d.field("induced_variance"));
    if (ds.induced_draws < 4) throw ConfigError(d.field("induced_draws"), "must be at least 4");
  }

  if (n.has("dma")) {
    Node d = n.child("dma");
    d.get("panel", c.dma.panel);
    c.dma.panel = resolve(base_dir, c.dma.panel);
    d.get("alphas", c.dma.alphas);
    d.finish();
    if (c.dma.alphas.empty()) throw ConfigError(d.field("alphas"), "must not be empty");
    alphas_ok(c.dma.alphas, d.field("alphas"));
  }

  n.get("output", c.output);
  if (c.output.empty()) throw ConfigError("output", "must not be empty");
  c.output = resolve(base_dir, c.output);
  if (n.has("seed")) {
    const json& s = n.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  n.get("threads", c.threads);
  if (c.threads < 0) throw ConfigError("threads", "must be nonnegative");
  n.finish();

  json canon = root;
  canon["seed"] = c.seed;
  c.canonical = canon.dump();
  return c;
}

}  // namespace

SamplerConfig RunConfig::sampler(const ModelSection& m) const {
  SamplerConfig s;
  s.phi_prior = m.phi_prior;
  s.l_prior = m.l_prior;
  s.sv_priors = sv_priors;
  s.sv_options = sv_options;
  return s;
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_json(root, base_dir);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  return parse_run_config(ss.str(), parent.empty() ? "." : parent.string());
}

PriorConfig parse_prior_config(const std::string& text, const std::string& field) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, std::string("invalid JSON: ") + e.what());
  }
  return parse_prior(Node(root, field));
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  json canon = json::parse(cfg.canonical);
  canon["seed"] = seed;
  cfg.canonical = canon.dump();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical)));
  return buf;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

// Seed streams of the pipeline steps.
enum : std::uint64_t { kSeedEstimate = 1, kSeedForecast = 2, kSeedDiagnose = 3 };

const char* kSubdirs[] = {"draws", "summaries", "scores", "dma", "diagnostics", "data"};

std::string out_path(const RunConfig& cfg, const std::string& rel) { return (fs::path(cfg.output) / rel).string(); }

std::string alpha_label(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

std::string file_safe(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.' ? ch : '_';
  return out;
}

const Dataset& require_data(const RunConfig& cfg, std::optional<Dataset>& cache, const char* step) {
  if (!cfg.data) throw ConfigError("data", std::string("required by ") + step);
  if (!cache) cache = load_dataset(*cfg.data);
  return *cache;
}

std::vector<int> columns_of(const Dataset& d, const std::vector<std::string>& vars, const std::string& field) {
  std::vector<int> out;
  if (vars.empty()) {
    for (int j = 0; j < d.M(); ++j) out.push_back(j);
    return out;
  }
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const auto it = std::find(d.names.begin(), d.names.end(), vars[k]);
    if (it == d.names.end()) throw ConfigError(at(field, k), "series '" + vars[k] + "' is not in the loaded data");
    out.push_back(static_cast<int>(it - d.names.begin()));
  }
  return out;
}

int window_row(const Dataset& d, const std::string& bound, const std::string& field) {
  if (bound.empty()) throw ConfigError(field, "required by forecast");
  if (std::all_of(bound.begin(), bound.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
    return std::stoi(bound);
  const auto it = std::find(d.dates.begin(), d.dates.end(), bound);
  if (it == d.dates.end()) throw ConfigError(field, "date '" + bound + "' is not in the transformed sample");
  return static_cast<int>(it - d.dates.begin());
}

void write_errors(const std::vector<std::string>& errors, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& e : errors) out << e << "\n";
}

std::vector<std::string> dma_outputs(const RunConfig& cfg, const ScorePanel& panel, const std::vector<double>& alphas,
                                     const std::string& stem) {
  std::vector<std::string> files;
  for (double a : alphas) {
    const DmaResult r = dma_run(panel, a);
    const std::string tag = stem + "a" + alpha_label(a);
    const std::string w = "dma/weights_" + tag + ".csv";
    const std::string u = "dma/updated_" + tag + ".csv";
    const std::string s = "dma/score_" + tag + ".csv";
    write_dma_weights_csv(r, out_path(cfg, w), false);
    write_dma_weights_csv(r, out_path(cfg, u), true);
    write_dma_score_csv(r, out_path(cfg, s));
    files.insert(files.end(), {w, u, s});
  }
  return files;
}

}  // namespace

std::string score_panel_name(int horizon, const std::string& subset) {
  return "lpl_h" + std::to_string(horizon) + "_" + file_safe(subset) + ".csv";
}

std::vector<std::string> prepare_output(const RunConfig& cfg) {
  for (const char* d : kSubdirs) fs::create_directories(fs::path(cfg.output) / d);
  json lock;
  lock["hash"] = config_hash(cfg);
  lock["config"] = json::parse(cfg.canonical);
  std::ofstream out(out_path(cfg, "config.lock"));
  if (!out) throw DataError("cannot write " + out_path(cfg, "config.lock"));
  out << lock.dump(2) << "\n";
  return {"config.lock"};
}

std::vector<std::string> run_estimate(const RunConfig& cfg) {
  std::optional<Dataset> cache;
  const Dataset& all = require_data(cfg, cache, "estimate");
  const ModelSection& m = cfg.model;
  const Dataset data = all.select(columns_of(all, m.variables, "model.variables"));
  const VarSpec spec(data.M(), m.p, m.intercept);
  McmcConfig mc = cfg.mcmc;
  mc.seed = derive_seed(cfg.seed, kSeedEstimate);
  const PosteriorDraws draws = run_mcmc(data, spec, cfg.sampler(m), mc);

  auto files = prepare_output(cfg);
  const std::string stem = file_safe(m.name);
  const std::string d = "draws/" + stem + ".bin", s = "summaries/" + stem + ".csv",
                    h = "diagnostics/" + stem + "_hoyer.csv";
  write_draws(draws, out_path(cfg, d));
  write_summary_csv(summarize(draws), out_path(cfg, s));
  write_posterior_hoyer_csv(posterior_hoyer(draws, phi_groups(spec, Grouping::SemiGlobal)), out_path(cfg, h));
  files.insert(files.end(), {d, s, h});
  return files;
}

std::vector<std::string> run_forecast(const RunConfig& cfg) {
  std::optional<Dataset> cache;
  const Dataset& data = require_data(cfg, cache, "forecast");
  const ForecastSection& f = cfg.forecast;
  const std::vector<ModelSection> sections = f.models.empty() ? std::vector<ModelSection>{cfg.model} : f.models;
  std::vector<ModelEntry> models;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& m = sections[i];
    const std::string field = f.models.empty() ? "model.variables" : at("forecast.models", i) + ".variables";
    columns_of(data, m.variables, field);
    ModelEntry e;
    e.name = m.name;
    e.spec = VarSpec(m.variables.empty() ? data.M() : static_cast<int>(m.variables.size()), m.p, m.intercept);
    e.sampler = cfg.sampler(m);
    e.variables = m.variables;
    models.push_back(e);
  }
  if (f.benchmark &&
      std::none_of(models.begin(), models.end(), [&](const ModelEntry& e) { return e.name == *f.benchmark; }))
    throw ConfigError("forecast.benchmark", "no model named '" + *f.benchmark + "'");

  ExerciseConfig ex;
  ex.first_window_end = window_row(data, f.first_window_end, "forecast.first_window_end");
  ex.last_window_end = window_row(data, f.last_window_end, "forecast.last_window_end");
  if (ex.last_window_end < ex.first_window_end)
    throw ConfigError("forecast.last_window_end", "precedes first_window_end");
  if (ex.last_window_end >= data.T() - 1)
    throw ConfigError("forecast.last_window_end", "leaves no observation to predict");
  ex.horizons = f.horizons;
  ex.subsets = f.subsets;
  ex.mcmc = cfg.mcmc;
  ex.mcmc.seed = derive_seed(cfg.seed, kSeedForecast);
  ex.forecast = f.options;
  ex.threads = cfg.threads;
  const auto panels = recursive_exercise(data, models, ex);

  auto files = prepare_output(cfg);
  for (const auto& p : panels) {
    const std::string name = score_panel_name(p.horizon, p.subset);
    write_score_panel_csv(p, out_path(cfg, "scores/" + name));
    const std::string cum = "scores/cumulative_" + name.substr(4);
    write_cumulative_csv(p, out_path(cfg, cum), f.benchmark);
    files.insert(files.end(), {"scores/" + name, cum});
    if (!p.errors.empty()) {
      const std::string e = "scores/errors_" + name.substr(4, name.size() - 8) + ".txt";
      write_errors(p.errors, out_path(cfg, e));
      files.push_back(e);
    }
    if (!f.dma_alphas.empty() && p.errors.empty()) {
      const auto d = dma_outputs(cfg, p, f.dma_alphas, name.substr(4, name.size() - 8) + "_");
      files.insert(files.end(), d.begin(), d.end());
    }
  }
  return files;
}

std::vector<std::string> run_dma(const RunConfig& cfg) {
  std::string path = cfg.dma.panel;
  if (path.empty()) {
    const auto& f = cfg.forecast;
    path = out_path(cfg, "scores/" + score_panel_name(f.horizons.front(), f.subsets.front().label));
  }
  const ScorePanel panel = read_score_panel_csv(path);
  auto files = prepare_output(cfg);
  const auto d = dma_outputs(cfg, panel, cfg.dma.alphas, "");
  files.insert(files.end(), d.begin(), d.end());
  return files;
}

std::vector<std::string> run_simulate(const RunConfig& cfg) {
  const SimulateSection& s = cfg.simulate;
  if (s.scenarios.empty()) throw ConfigError("simulate.scenarios", "required by simulate");
  SimStudyConfig sc;
  sc.scenarios = s.scenarios;
  if (s.priors.empty())
    sc.priors = study_priors();
  else
    for (const auto& name : s.priors) sc.priors.push_back(study_prior(name));
  sc.replications = s.replications;
  sc.mcmc = s.mcmc;
  sc.l_prior = cfg.model.l_prior;
  sc.intercept = false;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  const auto cells = run_sim_study(sc);

  auto files = prepare_output(cfg);
  write_sim_study_csv(cells, out_path(cfg, "summaries/sim_study.csv"));
  write_sim_study_table_csv(cells, out_path(cfg, "summaries/sim_study_table.csv"));
  files.insert(files.end(), {"summaries/sim_study.csv", "summaries/sim_study_table.csv"});
  std::vector<std::string> errors;
  for (const auto& c : cells)
    for (const auto& e : c.errors)
      errors.push_back(c.scenario + " M=" + std::to_string(c.M) + " T=" + std::to_string(c.T) + " " + c.prior + " " + e);
  if (!errors.empty()) {
    write_errors(errors, out_path(cfg, "summaries/sim_study_errors.txt"));
    files.push_back("summaries/sim_study_errors.txt");
  }
  if (s.write_data) {
    const int R = s.replications;
    for (std::size_t i = 0; i < s.scenarios.size(); ++i) {
      const auto& sn = s.scenarios[i];
      for (int r = 0; r < R; ++r) {
        // Same stream as the study uses for this replication.
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i) * R + r));
        DgpSample smp;
        try {
          smp = generate_dgp(sn, rng);
        } catch (const NumericalError&) {
          continue;
        }
        const std::string stem = "data/s" + std::to_string(i) + "_" + sn.label() + "_M" + std::to_string(sn.M) + "_T" +
                                 std::to_string(sn.T) + "_r" + std::to_string(r);
        write_dgp_csv(smp, out_path(cfg, stem + "_data.csv"), out_path(cfg, stem + "_truth.csv"));
        files.insert(files.end(), {stem + "_data.csv", stem + "_truth.csv"});
      }
    }
  }
  return files;
}

std::vector<std::string> run_prior_diagnose(const RunConfig& cfg) {
  const DiagnoseSection& d = cfg.diagnose;
  auto files = prepare_output(cfg);
  if (!d.densities.empty()) {
    std::vector<PriorConfig> priors;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < d.densities.size(); ++i) {
      try {
        marginal_density(d.densities[i].prior, 0.5);
      } catch (const ConfigError& e) {
        rethrow_at(at("diagnose.densities", i) + ".prior", e);
      }
      priors.push_back(d.densities[i].prior);
      labels.push_back(d.densities[i].label);
    }
    std::vector<double> grid(d.grid_points);
    for (int k = 0; k < d.grid_points; ++k)
      grid[k] = d.grid_lo + (d.grid_hi - d.grid_lo) * k / (d.grid_points - 1);
    write_density_grid_csv(priors, labels, grid, out_path(cfg, "diagnostics/density_grid.csv"));
    files.push_back("diagnostics/density_grid.csv");
  }
  const std::uint64_t base = derive_seed(cfg.seed, kSeedDiagnose);
  if (d.hoyer_sims > 0) {
    const auto scen = hoyer_scenarios();
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < scen.size(); ++i)
      values.push_back(prior_hoyer(scen[i].cfg, d.hoyer_n, d.hoyer_sims, derive_seed(base, i), cfg.threads));
    write_prior_hoyer_csv(scen, values, d.hoyer_n, out_path(cfg, "diagnostics/prior_hoyer.csv"));
    files.push_back("diagnostics/prior_hoyer.csv");
  }
  if (d.induced_M > 0) {
    Rng rng(derive_seed(base, 1000));
    const auto ip = induced_prior_experiment(d.induced_M, d.induced_variance, d.induced_draws, rng);
    write_induced_prior_csv(ip, out_path(cfg, "diagnostics/induced_kurtosis.csv"),
                            out_path(cfg, "diagnostics/induced_qq.csv"));
    files.insert(files.end(), {"diagnostics/induced_kurtosis.csv", "diagnostics/induced_qq.csv"});
  }
  return files;
}

}  // namespace bvarsv
