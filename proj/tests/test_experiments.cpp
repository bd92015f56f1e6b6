#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ppwave/experiments.hpp"

namespace {

namespace fs = std::filesystem;
using ppwave::ConfigError;
using ppwave::Json;

fs::path scratch(std::string const& name) {
  auto const dir = fs::temp_directory_path() / ("ppwave_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(fs::path const& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A document touching every section and nested object.
Json full_doc() {
  return Json::parse(R"({
    "model": {"kind": "reduced", "c1": 1.0, "c2": 1.0, "floor": 0.001,
              "profile": {"kind": "quadratic", "exponent": 4}},
    "scenario": {"name": "diamond", "p1": [0, 0, 0], "p2": [0, 0.2, 0],
                 "eps": 0.1, "tau0": 1, "eta_budget": 10,
                 "init": {"point": [0, 0, 1], "velocity": [0, 1, 0]},
                 "s_max": 1, "h": 0.01, "sigma_C": 2,
                 "expect": {"escaped": true, "tolerance": 0.001}},
    "numeric": {"grid": {"eta_min": 0, "eta_max": 0.2, "n_eta": 20,
                         "tau_min": -1, "tau_max": 1, "n_tau": 81, "xi_clip": 1e6},
                "grad_grid": {"xi_min": -1, "xi_max": 1, "n_xi": 3,
                              "tau_min": -1, "tau_max": 1, "n_tau": 3},
                "n_curves": 10, "n_steps": 5, "fd_points": 10, "seed": 7,
                "threads": 1, "tolerances": {"ode_drift": 1e-8}},
    "output": {"dir": "x", "json": true, "csv": false, "csv_stride": 2}
  })");
}

std::string config_error(Json const& doc, std::string const& scenario = "diamond") {
  try {
    ppwave::parse_config(doc, scenario);
  } catch (ConfigError const& e) {
    return e.what();
  }
  return {};
}

// Every object in `j`, with its JSON pointer.
void objects(Json const& j, Json::json_pointer const& at,
             std::vector<Json::json_pointer>& out) {
  if (!j.is_object()) return;
  out.push_back(at);
  for (auto it = j.begin(); it != j.end(); ++it) objects(it.value(), at / it.key(), out);
}

TEST(Config, FullDocumentParses) {
  auto const c = ppwave::parse_config(full_doc(), "diamond");
  EXPECT_EQ(c.numeric.grid.n_eta, 20u);
  EXPECT_EQ(c.scenario.p2.eta, 0.2);
  EXPECT_EQ(c.numeric.seed, 7u);
  EXPECT_EQ(c.output.csv_stride, 2u);
  EXPECT_EQ(c.scenario.expect.escaped, true);
}

TEST(Config, UnknownKeyAtEveryLevelIsRejected) {
  auto const base = full_doc();
  std::vector<Json::json_pointer> ptrs;
  objects(base, Json::json_pointer(), ptrs);
  ASSERT_GE(ptrs.size(), 10u);
  for (auto const& p : ptrs) {
    for (std::string key : {"grid_size", "seeds", "C1", "Output", ""}) {
      auto doc = base;
      doc[p][key] = 1;
      auto const msg = config_error(doc);
      EXPECT_NE(msg.find("unknown key '" + key + "'"), std::string::npos)
          << p.to_string() << ": " << msg;
    }
  }
}

// Renaming each existing key by one character is also caught.
TEST(Config, MutatedKeysAreRejected) {
  auto const base = full_doc();
  std::vector<Json::json_pointer> ptrs;
  objects(base, Json::json_pointer(), ptrs);
  std::size_t mutations = 0;
  for (auto const& p : ptrs) {
    for (auto it = base[p].begin(); it != base[p].end(); ++it) {
      auto doc = base;
      std::string bad = it.key();
      bad.back() = bad.back() == 'z' ? 'y' : 'z';
      doc[p].erase(it.key());
      doc[p][bad] = it.value();
      EXPECT_NE(config_error(doc).find("unknown key '" + bad + "'"), std::string::npos)
          << p.to_string() << "/" << bad;
      ++mutations;
    }
  }
  EXPECT_GT(mutations, 40u);
}

TEST(Config, WrongTypesAndValues) {
  auto doc = full_doc();
  doc["numeric"]["seed"] = "seven";
  EXPECT_NE(config_error(doc).find("numeric.seed"), std::string::npos);

  doc = full_doc();
  doc["scenario"]["p1"] = Json::array({0, 0});
  EXPECT_NE(config_error(doc).find("scenario.p1"), std::string::npos);

  doc = full_doc();
  doc["model"]["c1"] = -1;
  EXPECT_NE(config_error(doc).find("model.c1"), std::string::npos);

  doc = full_doc();
  doc["model"]["kind"] = "schwarzschild";
  EXPECT_NE(config_error(doc).find("model.kind"), std::string::npos);

  doc = full_doc();
  doc["numeric"]["grid"]["n_tau"] = 1;
  EXPECT_NE(config_error(doc).find("numeric.grid"), std::string::npos);

  doc = full_doc();
  doc["numeric"] = Json::array();
  EXPECT_NE(config_error(doc).find("'numeric' must be an object"), std::string::npos);

  doc = full_doc();
  doc["scenario"]["sigma_C"] = 0.5;
  EXPECT_NE(config_error(doc).find("sigma_C"), std::string::npos);
}

TEST(Config, ScenarioNameMustMatch) {
  auto const msg = config_error(full_doc(), "escape");
  EXPECT_NE(msg.find("scenario.name"), std::string::npos) << msg;
  EXPECT_THROW(ppwave::default_config("nope"), ConfigError);
}

TEST(Config, TableFileResolvesRelativeToConfig) {
  auto const dir = scratch("table");
  std::ofstream(dir / "f.csv") << "tau,f\n-2,0.5\n0,1\n2,0.5\n";
  Json doc = {{"model", {{"profile", {{"kind", "table"}, {"table_file", "f.csv"}}}}}};
  std::ofstream(dir / "cfg.json") << doc.dump();
  auto const c = ppwave::load_config(dir / "cfg.json", "diamond");
  EXPECT_EQ(c.source, (dir / "cfg.json").string());
  auto const m = ppwave::build_reduced(c.model);
  EXPECT_EQ(m.f(0.0), 1.0);
  EXPECT_EQ(m.f(2.0), 0.5);

  doc["model"]["profile"]["table_file"] = "missing.csv";
  std::ofstream(dir / "bad.json") << doc.dump();
  try {
    ppwave::load_config(dir / "bad.json", "diamond");
    FAIL();
  } catch (ConfigError const& e) {
    EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
  }
}

TEST(Config, MissingOrMalformedFile) {
  auto const dir = scratch("malformed");
  EXPECT_THROW(ppwave::load_config(dir / "absent.json", "diamond"), ConfigError);
  std::ofstream(dir / "broken.json") << "{\"model\": ";
  EXPECT_THROW(ppwave::load_config(dir / "broken.json", "diamond"), ConfigError);
}

TEST(Config, DefaultsAreScenarioSpecificAndReported) {
  auto const esc = ppwave::default_config("escape");
  EXPECT_EQ(esc.model.kind, "counterexample");
  EXPECT_EQ(esc.model.profile.kind, "power");
  EXPECT_EQ(esc.source, "built-in defaults");
  auto const dom = ppwave::default_config("domination");
  EXPECT_EQ(dom.model.kind, "cw");
  auto const dia = ppwave::default_config("diamond");
  EXPECT_EQ(dia.numeric.grid.n_tau, 2001u);
  EXPECT_EQ(dia.numeric.grid.n_eta, 400u);
  EXPECT_EQ(dia.scenario.p2.eta, 0.4);
}

TEST(Config, CWModelNeedsMatrix) {
  auto c = ppwave::default_config("domination");
  c.model.A.clear();
  EXPECT_THROW(ppwave::build_cw(c.model), ConfigError);
}

TEST(RunScenario, EscapeDefaultMatchesAnalyticValue) {
  auto c = ppwave::default_config("escape");
  auto const out = scratch("escape");
  auto const rep = ppwave::run_scenario(c, out);
  EXPECT_TRUE(rep.all_pass());
  EXPECT_EQ(rep.metrics["escaped"], true);
  EXPECT_NEAR(rep.metrics["eta_at_escape"].get<double>(), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  auto const j = Json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["config_source"], "built-in defaults");
  EXPECT_EQ(j["inputs"]["model"]["kind"], "counterexample");
}

TEST(RunScenario, EscapeExpectationCanFail) {
  auto c = ppwave::default_config("escape");
  c.output.json = false;
  c.scenario.expect.eta_at_escape = 0.5;
  auto const rep = ppwave::run_scenario(c, scratch("escape_fail"));
  EXPECT_FALSE(rep.all_pass());
}

TEST(RunScenario, DiamondStandardInstancePasses) {
  auto c = ppwave::default_config("diamond");
  c.output.csv = false;
  auto const out = scratch("diamond");
  auto const rep = ppwave::run_scenario(c, out);
  EXPECT_TRUE(rep.all_pass());
  double const max_x = rep.metrics["diamond"]["max_abs_x"].get<double>();
  EXPECT_LE(max_x, rep.metrics["certificate"]["d"].get<double>());
  EXPECT_EQ(rep.metrics["compactness"]["status"], "pass");
  EXPECT_TRUE(fs::exists(out / "diamond.json"));
}

TEST(RunScenario, ReportIsDeterministicApartFromWallClock) {
  auto c = ppwave::parse_config(full_doc(), "diamond");
  c.output.csv = true;
  auto const out = scratch("determinism");
  auto strip = [](Json j) {
    j.erase("wall_clock_seconds");
    return j.dump();
  };
  ppwave::run_scenario(c, out);
  auto const a = strip(Json::parse(slurp(out / "report.json")));
  auto const slices_a = slurp(out / "slices" / "index.csv");
  ppwave::run_scenario(c, out);
  auto const b = strip(Json::parse(slurp(out / "report.json")));
  EXPECT_EQ(a, b);
  EXPECT_EQ(slices_a, slurp(out / "slices" / "index.csv"));
}

TEST(RunScenario, GeodesicAndTimefnChecksPass) {
  auto g = ppwave::default_config("geodesic");
  g.output.json = false;
  auto const rg = ppwave::run_scenario(g, scratch("geodesic"));
  EXPECT_TRUE(rg.all_pass());

  auto t = ppwave::default_config("timefn_check");
  t.output.json = false;
  t.output.csv = false;
  t.numeric.grad_grid = {-10, 10, 101, -10, 10, 101};
  t.numeric.fd_points = 100;
  auto const rt = ppwave::run_scenario(t, scratch("timefn"));
  EXPECT_TRUE(rt.all_pass());
}

TEST(RunScenario, DominationPasses) {
  auto c = ppwave::default_config("domination");
  c.output.json = false;
  c.numeric.n_curves = 100;
  EXPECT_TRUE(ppwave::run_scenario(c, scratch("domination")).all_pass());
}

// The scaling probe only records; its checks are informational.
TEST(RunScenario, ScalingChecksAreNotAsserted) {
  auto c = ppwave::default_config("scaling");
  c.output.json = false;
  c.numeric.n_curves = 50;
  c.numeric.grid = {0, 2, 100, -10, 10, 401, 1e6};
  auto const rep = ppwave::run_scenario(c, scratch("scaling"));
  EXPECT_TRUE(rep.all_pass());
  for (auto const& chk : rep.checks) EXPECT_FALSE(chk.asserted) << chk.name;
}

}  // namespace
