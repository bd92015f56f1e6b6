// ppwave: experiment configuration, scenario runner and run reports.
//
// A configuration is a JSON object with up to four sections:
//
//   model     kind (reduced | cw | counterexample), c1, c2, profile, A, floor
//   scenario  name and the scenario's own parameters (endpoints, eps, ...)
//   numeric   grid, grad_grid, curve counts, seed, threads, tolerances
//   output    dir, json, csv, csv_stride
//
// Parsing is strict: an unknown key anywhere is a ConfigError naming the
// key. Defaults depend on the scenario and are filled in before the file is
// applied, so a missing file yields a complete configuration.

#ifndef PPWAVE_EXPERIMENTS_HPP_
#define PPWAVE_EXPERIMENTS_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppwave/acceptance.hpp"
#include "ppwave/common.hpp"
#include "ppwave/geodesics.hpp"
#include "ppwave/io.hpp"
#include "ppwave/reachability.hpp"
#include "ppwave/spacetimes.hpp"
#include "ppwave/timefunctions.hpp"

namespace ppwave {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> const& scenario_names() {
  static std::vector<std::string> const names = {
      "timefn_check", "geodesic", "diamond",   "escape",
      "domination",   "scaling",  "verify_all"};
  return names;
}

struct ProfileConfig {
  std::string kind = "quadratic";  // quadratic | power | table
  double exponent = 4.0;
  std::vector<double> nodes;
  std::vector<double> values;
  std::string table_file;  // CSV with columns tau,f
};

struct ModelConfig {
  std::string kind = "reduced";  // reduced | cw | counterexample
  double c1 = 1.0;
  double c2 = 1.0;
  ProfileConfig profile;
  std::vector<std::vector<double>> A;
  double floor = 1e-3;
};

struct ExpectConfig {
  std::optional<bool> escaped;
  std::optional<double> eta_at_escape;
  double tolerance = 1e-3;
};

struct ScenarioConfig {
  std::string name;
  Point3 p1{0.0, 0.0, 0.0};
  Point3 p2{0.0, 0.4, 0.0};
  double eps = 0.1;
  double tau0 = 1.0;
  double eta_budget = 1e3;
  GeodesicState init{{0.0, 0.0, 1.0}, {2.0, 1.0, 0.0}};
  double s_max = 10.0;
  double h = 1e-3;
  double sigma_C = 2.0;
  ExpectConfig expect;
};

struct NumericConfig {
  GridSpec grid{0.0, 0.4, 400, -6.0, 6.0, 2001, 1e6};
  GridSpec2 grad_grid{-50.0, 50.0, 1001, -50.0, 50.0, 1001};
  std::size_t n_curves = 1000;
  std::size_t n_steps = 50;
  std::size_t fd_points = 1000;
  std::uint64_t seed = 20240611;
  unsigned threads = 1;
  Tolerances tol{};
};

struct OutputConfig {
  std::string dir;
  bool json = true;
  bool csv = true;
  std::size_t csv_stride = 10;  // thinning of the gradient grid CSV
};

struct ExperimentConfig {
  ModelConfig model;
  ScenarioConfig scenario;
  NumericConfig numeric;
  OutputConfig output;
  std::string source = "built-in defaults";
};

// Scenario-dependent defaults.
inline ExperimentConfig default_config(std::string const& scenario) {
  auto const& names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end()) {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  ExperimentConfig c;
  c.scenario.name = scenario;
  c.output.dir = "out/" + scenario;
  if (scenario == "escape") {
    c.model.kind = "counterexample";
    c.model.profile.kind = "power";
    c.model.profile.exponent = 4.0;
  } else if (scenario == "domination") {
    c.model.kind = "cw";
    c.model.A = {{-0.5, 0.0}, {0.0, -0.5}};
  } else if (scenario == "scaling") {
    c.scenario.p2 = {0.0, 2.0, 0.0};
    c.numeric.grid = {0.0, 2.0, 400, -20.0, 20.0, 2001, 1e6};
  }
  return c;
}

namespace detail {

inline void check_keys(Json const& j, std::string const& where,
                       std::initializer_list<char const*> allowed) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (char const* a : allowed) ok = ok || it.key() == a;
    if (!ok) {
      throw ConfigError("unknown key '" + it.key() + "' in '" + where + "'");
    }
  }
}

template <typename T>
void read(Json const& j, char const* key, std::string const& where, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (nlohmann::json::exception const&) {
    throw ConfigError("key '" + where + "." + key + "' has the wrong type");
  }
}

inline void read_positive(Json const& j, char const* key,
                          std::string const& where, double& out) {
  read(j, key, where, out);
  if (!(out > 0.0) || !std::isfinite(out)) {
    throw ConfigError("key '" + where + "." + key + "' must be positive");
  }
}

inline void read_point(Json const& j, char const* key, std::string const& where,
                       Point3& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  std::vector<double> v;
  read(j, key, where, v);
  if (v.size() != 3) {
    throw ConfigError("key '" + where + "." + key +
                      "' must be [xi, eta, tau]");
  }
  out = {v[0], v[1], v[2]};
}

inline void parse_grid(Json const& j, std::string const& where, GridSpec& g) {
  check_keys(j, where,
             {"eta_min", "eta_max", "n_eta", "tau_min", "tau_max", "n_tau",
              "xi_clip"});
  read(j, "eta_min", where, g.eta_min);
  read(j, "eta_max", where, g.eta_max);
  read(j, "n_eta", where, g.n_eta);
  read(j, "tau_min", where, g.tau_min);
  read(j, "tau_max", where, g.tau_max);
  read(j, "n_tau", where, g.n_tau);
  read(j, "xi_clip", where, g.xi_clip);
  try {
    g.validate();
  } catch (InputError const& e) {
    throw ConfigError("'" + where + "': " + e.what());
  }
}

inline void parse_grad_grid(Json const& j, std::string const& where,
                            GridSpec2& g) {
  check_keys(j, where,
             {"xi_min", "xi_max", "n_xi", "tau_min", "tau_max", "n_tau"});
  read(j, "xi_min", where, g.xi_min);
  read(j, "xi_max", where, g.xi_max);
  read(j, "n_xi", where, g.n_xi);
  read(j, "tau_min", where, g.tau_min);
  read(j, "tau_max", where, g.tau_max);
  read(j, "n_tau", where, g.n_tau);
  try {
    g.validate();
  } catch (InputError const& e) {
    throw ConfigError("'" + where + "': " + e.what());
  }
}

inline void parse_model(Json const& j, std::filesystem::path const& base,
                        ModelConfig& m) {
  check_keys(j, "model", {"kind", "c1", "c2", "profile", "A", "floor"});
  read(j, "kind", "model", m.kind);
  if (m.kind != "reduced" && m.kind != "cw" && m.kind != "counterexample") {
    throw ConfigError("key 'model.kind' must be reduced, cw or counterexample");
  }
  read_positive(j, "c1", "model", m.c1);
  read_positive(j, "c2", "model", m.c2);
  read_positive(j, "floor", "model", m.floor);
  read(j, "A", "model", m.A);
  if (auto it = j.find("profile"); it != j.end()) {
    Json const& p = *it;
    check_keys(p, "model.profile",
               {"kind", "exponent", "nodes", "values", "table_file"});
    ProfileConfig& pc = m.profile;
    read(p, "kind", "model.profile", pc.kind);
    if (pc.kind != "quadratic" && pc.kind != "power" && pc.kind != "table") {
      throw ConfigError(
          "key 'model.profile.kind' must be quadratic, power or table");
    }
    read_positive(p, "exponent", "model.profile", pc.exponent);
    read(p, "nodes", "model.profile", pc.nodes);
    read(p, "values", "model.profile", pc.values);
    read(p, "table_file", "model.profile", pc.table_file);
    if (!pc.table_file.empty()) {
      std::filesystem::path path = pc.table_file;
      if (path.is_relative()) path = base / path;
      if (!std::filesystem::exists(path)) {
        throw ConfigError("key 'model.profile.table_file': file " +
                          path.string() + " does not exist");
      }
      pc.table_file = path.string();
    }
  }
}

inline void parse_scenario(Json const& j, ScenarioConfig& s) {
  check_keys(j, "scenario",
             {"name", "p1", "p2", "eps", "tau0", "eta_budget", "init", "s_max",
              "h", "sigma_C", "expect"});
  std::string name = s.name;
  read(j, "name", "scenario", name);
  if (name != s.name) {
    throw ConfigError("key 'scenario.name' is '" + name +
                      "' but the command runs '" + s.name + "'");
  }
  read_point(j, "p1", "scenario", s.p1);
  read_point(j, "p2", "scenario", s.p2);
  read_positive(j, "eps", "scenario", s.eps);
  read(j, "tau0", "scenario", s.tau0);
  read_positive(j, "eta_budget", "scenario", s.eta_budget);
  read_positive(j, "s_max", "scenario", s.s_max);
  read_positive(j, "h", "scenario", s.h);
  read(j, "sigma_C", "scenario", s.sigma_C);
  if (!(s.sigma_C >= 1.0)) {
    throw ConfigError("key 'scenario.sigma_C' must be >= 1");
  }
  if (auto it = j.find("init"); it != j.end()) {
    check_keys(*it, "scenario.init", {"point", "velocity"});
    read_point(*it, "point", "scenario.init", s.init.point);
    Point3 v{s.init.velocity.dxi, s.init.velocity.deta, s.init.velocity.dtau};
    read_point(*it, "velocity", "scenario.init", v);
    s.init.velocity = {v.xi, v.eta, v.tau};
  }
  if (auto it = j.find("expect"); it != j.end()) {
    check_keys(*it, "scenario.expect", {"escaped", "eta_at_escape", "tolerance"});
    if (it->contains("escaped")) {
      bool b = false;
      read(*it, "escaped", "scenario.expect", b);
      s.expect.escaped = b;
    }
    if (it->contains("eta_at_escape")) {
      double v = 0.0;
      read(*it, "eta_at_escape", "scenario.expect", v);
      s.expect.eta_at_escape = v;
    }
    read_positive(*it, "tolerance", "scenario.expect", s.expect.tolerance);
  }
}

inline void parse_numeric(Json const& j, NumericConfig& n) {
  check_keys(j, "numeric",
             {"grid", "grad_grid", "n_curves", "n_steps", "fd_points", "seed",
              "threads", "tolerances"});
  if (auto it = j.find("grid"); it != j.end()) {
    parse_grid(*it, "numeric.grid", n.grid);
  }
  if (auto it = j.find("grad_grid"); it != j.end()) {
    parse_grad_grid(*it, "numeric.grad_grid", n.grad_grid);
  }
  read(j, "n_curves", "numeric", n.n_curves);
  read(j, "n_steps", "numeric", n.n_steps);
  read(j, "fd_points", "numeric", n.fd_points);
  read(j, "seed", "numeric", n.seed);
  read(j, "threads", "numeric", n.threads);
  if (n.n_curves == 0 || n.n_steps == 0) {
    throw ConfigError("keys 'numeric.n_curves' and 'numeric.n_steps' must be positive");
  }
  if (auto it = j.find("tolerances"); it != j.end()) {
    std::string const w = "numeric.tolerances";
    check_keys(*it, w,
               {"null_band", "ode_drift", "fd_gradient", "escape_convergence",
                "oracle_equality"});
    read_positive(*it, "null_band", w, n.tol.null_band);
    read_positive(*it, "ode_drift", w, n.tol.ode_drift);
    read_positive(*it, "fd_gradient", w, n.tol.fd_gradient);
    read_positive(*it, "escape_convergence", w, n.tol.escape_convergence);
    read_positive(*it, "oracle_equality", w, n.tol.oracle_equality);
  }
}

inline void parse_output(Json const& j, OutputConfig& o) {
  check_keys(j, "output", {"dir", "json", "csv", "csv_stride"});
  read(j, "dir", "output", o.dir);
  read(j, "json", "output", o.json);
  read(j, "csv", "output", o.csv);
  read(j, "csv_stride", "output", o.csv_stride);
}

}  // namespace detail

// Applies a parsed JSON document on top of the scenario defaults.
inline ExperimentConfig parse_config(Json const& doc, std::string const& scenario,
                                     std::filesystem::path const& base = ".") {
  ExperimentConfig c = default_config(scenario);
  detail::check_keys(doc, "config", {"model", "scenario", "numeric", "output"});
  if (auto it = doc.find("model"); it != doc.end()) {
    detail::parse_model(*it, base, c.model);
  }
  if (auto it = doc.find("scenario"); it != doc.end()) {
    detail::parse_scenario(*it, c.scenario);
  }
  if (auto it = doc.find("numeric"); it != doc.end()) {
    detail::parse_numeric(*it, c.numeric);
  }
  if (auto it = doc.find("output"); it != doc.end()) {
    detail::parse_output(*it, c.output);
  }
  return c;
}

inline ExperimentConfig load_config(std::filesystem::path const& path,
                                    std::string const& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (nlohmann::json::parse_error const& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " +
                      e.what());
  }
  auto c = parse_config(doc, scenario, path.parent_path());
  c.source = path.string();
  return c;
}

// Reads a two-column CSV (tau,f) with a header line.
inline Profile load_table_profile(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read profile table " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> nodes, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) {
      throw ConfigError("profile table " + path + ": malformed line '" + line + "'");
    }
    try {
      nodes.push_back(std::stod(a));
      values.push_back(std::stod(b));
    } catch (std::exception const&) {
      throw ConfigError("profile table " + path + ": malformed line '" + line + "'");
    }
  }
  return Profile::table(std::move(nodes), std::move(values));
}

inline Profile build_profile(ModelConfig const& m) {
  ProfileConfig const& p = m.profile;
  if (p.kind == "quadratic") return Profile::quadratic(m.c1, m.c2);
  if (p.kind == "power") return Profile::power(p.exponent);
  if (!p.table_file.empty()) return load_table_profile(p.table_file);
  return Profile::table(p.nodes, p.values);
}

inline ReducedModel build_reduced(ModelConfig const& m) {
  if (m.kind == "cw") {
    throw ConfigError("key 'model.kind': scenario needs a reduced model, got cw");
  }
  return ReducedModel(build_profile(m), m.c1, m.c2);
}

inline CWModel build_cw(ModelConfig const& m) {
  if (m.kind != "cw") {
    throw ConfigError("key 'model.kind': scenario needs a cw model, got " + m.kind);
  }
  if (m.A.empty()) throw ConfigError("key 'model.A' is required for a cw model");
  return CWModel(SymMatrix::from_rows(m.A), m.floor);
}

inline Json to_json(ExperimentConfig const& c) {
  Json profile = {{"kind", c.model.profile.kind}};
  if (c.model.profile.kind == "power") profile["exponent"] = c.model.profile.exponent;
  if (c.model.profile.kind == "table") {
    profile["nodes"] = c.model.profile.nodes;
    profile["values"] = c.model.profile.values;
    profile["table_file"] = c.model.profile.table_file;
  }
  Json model = {{"kind", c.model.kind}, {"c1", c.model.c1}, {"c2", c.model.c2},
                {"profile", profile}};
  if (c.model.kind == "cw") {
    model["A"] = c.model.A;
    model["floor"] = c.model.floor;
  }
  ScenarioConfig const& s = c.scenario;
  Json scenario = {
      {"name", s.name},
      {"p1", to_json(s.p1)},
      {"p2", to_json(s.p2)},
      {"eps", s.eps},
      {"tau0", s.tau0},
      {"eta_budget", s.eta_budget},
      {"init", {{"point", to_json(s.init.point)},
                {"velocity", {s.init.velocity.dxi, s.init.velocity.deta,
                              s.init.velocity.dtau}}}},
      {"s_max", s.s_max},
      {"h", s.h},
      {"sigma_C", s.sigma_C}};
  NumericConfig const& n = c.numeric;
  GridSpec2 const& gg = n.grad_grid;
  Json numeric = {
      {"grid", to_json(n.grid)},
      {"grad_grid", {{"xi_min", gg.xi_min}, {"xi_max", gg.xi_max},
                     {"n_xi", gg.n_xi}, {"tau_min", gg.tau_min},
                     {"tau_max", gg.tau_max}, {"n_tau", gg.n_tau}}},
      {"n_curves", n.n_curves},
      {"n_steps", n.n_steps},
      {"fd_points", n.fd_points},
      {"seed", n.seed},
      {"tolerances", {{"null_band", n.tol.null_band},
                      {"ode_drift", n.tol.ode_drift},
                      {"fd_gradient", n.tol.fd_gradient},
                      {"escape_convergence", n.tol.escape_convergence},
                      {"oracle_equality", n.tol.oracle_equality}}}};
  return {{"model", model}, {"scenario", scenario}, {"numeric", numeric}};
}

// ---------------------------------------------------------------------------
// Reports

struct Check {
  std::string name;
  bool pass = false;
  bool asserted = true;
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::string config_source;
  Json inputs = Json::object();
  std::vector<Check> checks;
  Json metrics = Json::object();
  std::vector<std::string> artifacts;
  double wall_clock_seconds = 0.0;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](Check const& c) { return c.pass || !c.asserted; });
  }

  void add(std::string name, bool pass, std::string detail = {},
           bool asserted = true) {
    checks.push_back({std::move(name), pass, asserted, std::move(detail)});
  }
};

// Wall-clock values appear only under keys named "wall_clock_seconds".
inline Json to_json(RunReport const& r) {
  Json checks = Json::array();
  for (auto const& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"asserted", c.asserted},
                      {"detail", c.detail}});
  }
  return {{"scenario", r.scenario},
          {"config_source", r.config_source},
          {"inputs", r.inputs},
          {"all_pass", r.all_pass()},
          {"checks", checks},
          {"metrics", r.metrics},
          {"artifacts", r.artifacts},
          {"wall_clock_seconds", r.wall_clock_seconds}};
}

// Writes plot data for a result type into `dir`, returning the file paths.
inline std::vector<std::string> emit_plot_data(DiamondResult const& r,
                                               std::filesystem::path const& dir) {
  std::vector<std::string> out;
  for (auto const& p : write_diamond_csv(r, dir)) out.push_back(p.string());
  return out;
}

inline std::vector<std::string> emit_plot_data(CurveSample const& c,
                                               std::filesystem::path const& path) {
  atomic_write(path, curve_csv(c));
  return {path.string()};
}

inline std::vector<std::string> emit_plot_data(GradReport const& r,
                                               TimeFnParams const& params,
                                               std::filesystem::path const& path,
                                               std::size_t stride = 1) {
  atomic_write(path, gradient_grid_csv(r, params, stride));
  return {path.string()};
}

// ---------------------------------------------------------------------------
// Scenarios

namespace scenarios {

namespace fs = std::filesystem;

inline void run_timefn_check(ExperimentConfig const& c, fs::path const& out,
                             RunReport& rep) {
  auto const model = build_reduced(c.model);
  if (!model.is_quadratic()) {
    throw ConfigError("key 'model.profile.kind': timefn_check needs quadratic");
  }
  TimeFnParams const params(c.scenario.eps, model.c1(), model.c2());
  auto const grad = verify_timelike_gradient(params, c.numeric.grad_grid,
                                             c.numeric.threads);
  double const origin = grad_time_fn({0.0, 0.0, 0.0}, params).norm_sq;
  double const expect = -0.5 / (model.c2() * model.c2());
  rep.add("max_norm_sq_negative", grad.max_norm_sq < 0.0,
          "max " + format_double(grad.max_norm_sq));
  rep.add("origin_norm_sq", std::abs(origin - expect) <= 1e-12,
          format_double(origin) + " vs " + format_double(expect));

  Rng rng(stream_seed(c.numeric.seed, 2));
  double const h = 1e-4;
  double worst = 0.0;
  for (std::size_t n = 0; n < c.numeric.fd_points; ++n) {
    Point3 const p{rng.uniform(-1e3, 1e3), 0.0, rng.uniform(-1e3, 1e3)};
    auto const g = grad_time_fn(p, params);
    auto T = [&](double dxi, double dtau) {
      return time_fn({p.xi + dxi, p.eta, p.tau + dtau}, params);
    };
    worst = std::max({worst,
                      acceptance::relative_error((T(h, 0) - T(-h, 0)) / (2 * h),
                                                 -g.phi_xi),
                      acceptance::relative_error((T(0, h) - T(0, -h)) / (2 * h),
                                                 -g.phi_tau)});
  }
  rep.add("fd_gradient", worst <= c.numeric.tol.fd_gradient,
          "max relative error " + format_double(worst));
  rep.metrics = {{"gradient", to_json(grad)},
                 {"origin_norm_sq", origin},
                 {"fd_max_relative_error", worst}};
  if (c.output.csv) {
    auto files = emit_plot_data(grad, params, out / "gradient_grid.csv",
                                c.output.csv_stride);
    rep.artifacts.insert(rep.artifacts.end(), files.begin(), files.end());
  }
}

inline void run_geodesic(ExperimentConfig const& c, fs::path const& out,
                         RunReport& rep) {
  auto const model = build_reduced(c.model);
  auto const& s = c.scenario;
  CurveSample curve;
  try {
    curve = integrate_geodesic(model, s.init, s.s_max, s.h);
  } catch (IntegrationBlowup const& e) {
    rep.add("integration_finite", false, e.what());
    curve = e.last_good();
  }
  double drift_norm = 0.0, drift_first = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    drift_norm = std::max(drift_norm,
                          std::abs(curve.logs[i].norm_sq - curve.logs[0].norm_sq));
    drift_first = std::max(drift_first, std::abs(curve.logs[i].first_integral -
                                                 curve.logs[0].first_integral));
  }
  double const tol = c.numeric.tol.ode_drift;
  rep.add("norm_sq_drift", drift_norm <= tol, format_double(drift_norm));
  rep.add("first_integral_drift", drift_first <= tol, format_double(drift_first));
  rep.metrics = {{"samples", curve.size()},
                 {"norm_sq_drift", drift_norm},
                 {"first_integral_drift", drift_first}};
  if (model.is_quadratic() && curve.size() > 0) {
    // The quadratic model is CW_1([[-c1^2]]) after a shear of xi.
    SymMatrix const A = quadratic_profile_as_cw_matrix(model.c1());
    double const c2 = model.c2();
    CWState const init{reduced_to_cw(s.init.point, c2),
                       reduced_to_cw(s.init.velocity, c2)};
    double sup = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      auto const exact = cw_geodesic_closed_form(A, init, curve.params[i]);
      Point3 const e = cw_to_reduced(exact.point, c2);
      Point3 const& p = curve.points[i];
      double const scale = std::max(1.0, std::abs(e.xi));
      sup = std::max({sup, std::abs(p.tau - e.tau), std::abs(p.eta - e.eta),
                      std::abs(p.xi - e.xi) / scale});
    }
    rep.add("closed_form_sup_error", sup <= 1e-6, format_double(sup));
    rep.metrics["closed_form_sup_error"] = sup;
  }
  if (c.output.csv) {
    auto files = emit_plot_data(curve, out / "geodesic.csv");
    rep.artifacts.insert(rep.artifacts.end(), files.begin(), files.end());
  }
}

inline bool certificate_applies(ReducedModel const& model, Point3 const& p1,
                                Point3 const& p2) {
  return model.is_quadratic() && p1.eta == 0.0 && p2.eta > 0.0 &&
         p2.eta < eta_threshold(model.c1());
}

inline void run_diamond(ExperimentConfig const& c, fs::path const& out,
                        RunReport& rep) {
  auto const model = build_reduced(c.model);
  auto const& s = c.scenario;
  auto const diamond = compute_diamond(model, s.p1, s.p2, c.numeric.grid);
  rep.add("diamond_not_clipped", diamond.verdict != Verdict::clipped,
          to_string(diamond.verdict));
  rep.metrics = {{"diamond", to_json(diamond, false)}};
  if (certificate_applies(model, s.p1, s.p2)) {
    auto const cert = make_lemma2_certificate(s.p1, s.p2, model.c1(), model.c2());
    auto const comp = verify_compactness(model, diamond, cert);
    rep.add("certificate_containment",
            comp.status == CompactnessReport::Status::pass,
            std::string(to_string(comp.status)) + ", max_abs_x " +
                format_double(diamond.max_abs_x) + " <= d " +
                format_double(cert.d));
    rep.metrics["certificate"] = to_json(cert);
    rep.metrics["compactness"] = to_json(comp);
  }
  if (c.output.json) {
    atomic_write(out / "diamond.json", to_json(diamond).dump(1) + "\n");
    rep.artifacts.push_back((out / "diamond.json").string());
  }
  if (c.output.csv) {
    auto files = emit_plot_data(diamond, out / "slices");
    rep.artifacts.push_back(files.front());  // index.csv; slices beside it
    rep.metrics["slice_files"] = files.size() - 1;
  }
}

inline void run_escape(ExperimentConfig const& c, fs::path const&,
                       RunReport& rep) {
  if (c.model.kind == "cw") {
    throw ConfigError("key 'model.kind': escape needs a profile, got cw");
  }
  Profile const f = build_profile(c.model);
  EscapeOptions opt;
  opt.eta_budget = c.scenario.eta_budget;
  opt.convergence = c.numeric.tol.escape_convergence;
  auto const r = null_escape_integrate(f, c.scenario.tau0, opt);
  rep.metrics = to_json(r);
  rep.add("integration_completed", true);
  auto const& e = c.scenario.expect;
  if (e.escaped) {
    rep.add("escaped", r.escaped == *e.escaped,
            r.escaped ? "escaped" : "no escape within budget");
  }
  if (e.eta_at_escape) {
    bool const ok = r.eta_at_escape &&
                    std::abs(*r.eta_at_escape - *e.eta_at_escape) <= e.tolerance;
    rep.add("eta_at_escape", ok,
            r.eta_at_escape ? format_double(*r.eta_at_escape) : "none");
  }
}

inline void run_domination(ExperimentConfig const& c, fs::path const&,
                           RunReport& rep) {
  CWModel const cw = build_cw(c.model);
  auto const target = dominating_reduced_model(cw);
  CurveBatchOptions batch;
  batch.n_curves = c.numeric.n_curves;
  batch.n_steps = c.numeric.n_steps;
  batch.seed = stream_seed(c.numeric.seed, 8);
  batch.threads = c.numeric.threads;
  auto const r = check_causal_image_projection(cw, target, batch);
  rep.metrics = to_json(r);
  rep.metrics["target_c1"] = target.c1();
  rep.metrics["target_c2"] = target.c2();
  rep.add("projection_worst_residual", r.worst_margin >= -1e-9,
          format_double(r.worst_margin));
  rep.add("projection_radial_gap", r.min_radial_gap.value_or(0.0) >= -1e-12,
          format_double(r.min_radial_gap.value_or(0.0)));
}

inline void run_scaling(ExperimentConfig const& c, fs::path const& out,
                        RunReport& rep) {
  auto const model = build_reduced(c.model);
  auto const cmp = diamond_via_scaling(c.scenario.p1, c.scenario.p2, model,
                                       c.numeric.grid);
  CurveBatchOptions batch;
  batch.n_curves = c.numeric.n_curves;
  batch.n_steps = c.numeric.n_steps;
  batch.seed = stream_seed(c.numeric.seed, 10);
  batch.threads = c.numeric.threads;
  auto const sigma = check_causal_image_sigma(c.scenario.sigma_C, model, batch);
  rep.metrics = {{"diamond_via_scaling", to_json(cmp)},
                 {"sigma", to_json(sigma)}};
  rep.add("sigma_causal_fraction", sigma.fraction_causal == 1.0,
          format_double(sigma.fraction_causal), false);
  rep.add("scaling_symmetric_difference", cmp.total_symmetric_difference == 0,
          std::to_string(cmp.total_symmetric_difference) + " cells", false);
  if (c.output.json) {
    atomic_write(out / "scaling.json", to_json(cmp).dump(1) + "\n");
    rep.artifacts.push_back((out / "scaling.json").string());
  }
}

inline void run_verify_all(ExperimentConfig const& c, fs::path const&,
                           RunReport& rep) {
  AcceptanceOptions opt;
  opt.seed = c.numeric.seed;
  opt.threads = c.numeric.threads;
  Json criteria = Json::array();
  for (auto const& fn : acceptance_criteria()) {
    auto const r = run_criterion(fn, opt);
    rep.add("criterion_" + std::to_string(r.id) + "_" + r.name, r.pass,
            r.summary, r.asserted);
    criteria.push_back({{"id", r.id},
                        {"name", r.name},
                        {"pass", r.pass},
                        {"asserted", r.asserted},
                        {"time_limit", r.time_limit},
                        {"wall_clock_seconds", r.seconds},
                        {"metrics", r.metrics}});
  }
  rep.metrics = {{"criteria", criteria}};
}

}  // namespace scenarios

// Runs the configured scenario and writes report.json into `out`.
inline RunReport run_scenario(ExperimentConfig const& c,
                              std::filesystem::path const& out) {
  auto const t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.scenario = c.scenario.name;
  rep.config_source = c.source;
  rep.inputs = to_json(c);
  std::string const& s = c.scenario.name;
  if (s == "timefn_check") scenarios::run_timefn_check(c, out, rep);
  else if (s == "geodesic") scenarios::run_geodesic(c, out, rep);
  else if (s == "diamond") scenarios::run_diamond(c, out, rep);
  else if (s == "escape") scenarios::run_escape(c, out, rep);
  else if (s == "domination") scenarios::run_domination(c, out, rep);
  else if (s == "scaling") scenarios::run_scaling(c, out, rep);
  else if (s == "verify_all") scenarios::run_verify_all(c, out, rep);
  else throw ConfigError("unknown scenario '" + s + "'");
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (c.output.json) {
    auto const path = out / "report.json";
    rep.artifacts.push_back(path.string());
    atomic_write(path, to_json(rep).dump(2) + "\n");
  }
  return rep;
}

}  // namespace ppwave

#endif  // PPWAVE_EXPERIMENTS_HPP_
