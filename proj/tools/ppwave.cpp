// ppwave command-line tool.
//
//   ppwave <scenario> [--config <path>] [--out <dir>] [--seed <u64>]
//                     [--threads <n>]
//
// Exit status: 0 when every asserted check passes, 1 on a failed check or an
// I/O error, 2 on a configuration error. PPWAVE_OUT_DIR replaces the output
// directory of the config; --out takes precedence over both.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ppwave/ppwave.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

void print_summary(ppwave::RunReport const& rep, std::string const& out_dir) {
  for (auto const& c : rep.checks) {
    char const* tag = c.pass ? "PASS" : (c.asserted ? "FAIL" : "INFO");
    std::cout << '[' << tag << "] " << c.name;
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << '\n';
  }
  std::cout << rep.scenario << ": " << (rep.all_pass() ? "pass" : "FAIL")
            << " (config: " << rep.config_source << ", output: " << out_dir
            << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical causal structure of pp-wave and Cahen-Wallach spacetimes"};
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  std::string names;
  for (auto const& n : ppwave::scenario_names()) {
    names += (names.empty() ? "" : ", ") + n;
  }
  app.add_option("scenario", scenario, "One of: " + names)->required();
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Master seed (overrides numeric.seed)");
  app.add_option("--threads", threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  ppwave::ExperimentConfig config;
  try {
    config = config_path.empty() ? ppwave::default_config(scenario)
                                 : ppwave::load_config(config_path, scenario);
  } catch (ppwave::ConfigError const& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) config.numeric.seed = *seed;
  if (threads) config.numeric.threads = *threads;
  if (char const* env = std::getenv("PPWAVE_OUT_DIR"); env && *env) {
    config.output.dir = env;
  }
  if (!out_dir.empty()) config.output.dir = out_dir;

  try {
    auto const rep = ppwave::run_scenario(config, config.output.dir);
    print_summary(rep, config.output.dir);
    return rep.all_pass() ? EXIT_SUCCESS : kExitFail;
  } catch (ppwave::ConfigError const& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (ppwave::InputError const& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (ppwave::PreconditionError const& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (ppwave::IoError const& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitFail;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
