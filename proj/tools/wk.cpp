// wk: integrate scenarios, run verification suites, sweep parameters.
//
// Exit codes: 0 success, 1 configuration error, 2 truncated integration,
// 3 failed verification check.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wk/scenario.hpp"
#include "wk/suites.hpp"

namespace {

namespace fs = std::filesystem;
using namespace wk;
using scenario::json;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kTruncated = 2;
constexpr int kCheckFailed = 3;

#ifndef WK_SCENARIO_DIR
#define WK_SCENARIO_DIR "scenarios"
#endif

struct IntegrateArgs {
  std::string config, out, format;
  bool plot = false;
};

int cmd_integrate(const IntegrateArgs& a) {
  auto cfg = scenario::load_scenario(a.config);
  if (!a.out.empty()) cfg.output.dir = a.out;
  if (!a.format.empty()) cfg.output.format = a.format;
  if (a.plot) cfg.output.plot_data = true;
  const auto traj = scenario::run(cfg);
  const auto files = scenario::write_run(cfg, traj);
  const auto diag = scenario::diagnostics_json(cfg, traj);
  std::cout << diag.dump() << '\n';
  for (const auto& p : files.paths) std::cerr << "wrote " << p.string() << '\n';
  if (traj.truncated()) {
    std::cerr << "integration truncated: " << traj.message << '\n';
    return kTruncated;
  }
  return kOk;
}

int cmd_config(const std::string& path) {
  std::cout << scenario::to_json(scenario::load_scenario(path)).dump(2) << '\n';
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& report_path) {
  const auto reports = suites::run_suite(suite);
  json all = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    const json j = scenario::report_json(r);
    std::cout << j.dump() << '\n';
    all.push_back(j);
    ok = ok && r.pass;
  }
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    if (!f) throw ConfigError(report_path + ": cannot open for writing");
    f << all.dump(2) << '\n';
  }
  const auto failed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.pass; });
  std::cerr << suite << ": " << reports.size() - failed << "/" << reports.size() << " checks passed\n";
  return ok ? kOk : kCheckFailed;
}

int cmd_sweep(const std::string& config, const std::string& out, std::size_t jobs) {
  auto cfg = scenario::load_scenario(config);
  if (!out.empty()) cfg.output.dir = out;
  if (!cfg.sweep) throw ConfigError(config + ": /sweep: missing sweep specification");
  const auto rows = scenario::run_sweep(cfg, jobs);
  fs::create_directories(cfg.output.dir);
  const fs::path path = fs::path(cfg.output.dir) / cfg.output.summary;
  {
    auto f = scenario::open_out(path);
    scenario::write_sweep_csv(f, cfg.sweep->parameter, rows);
  }
  scenario::write_sweep_csv(std::cout, cfg.sweep->parameter, rows);
  for (const auto& r : rows)
    if (!r.error.empty()) std::cerr << cfg.sweep->parameter << " = " << r.value << ": " << r.error << '\n';
  const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    const bool ca = a.summary.termination == "completed", cb = b.summary.termination == "completed";
    if (ca != cb) return ca;
    return a.summary.k2_drift < b.summary.k2_drift;
  });
  if (best != rows.end())
    std::cerr << "smallest k2 drift at " << cfg.sweep->parameter << " = " << best->value << " ("
              << best->summary.k2_drift << ")\n";
  std::cerr << "wrote " << path.string() << '\n';
  return kOk;
}

int cmd_catalog(const std::string& dir) {
  json j;
  j["charts"] = json::array({json{{"metric", "minkowski"}, {"params", json::array()}},
                             json{{"metric", "schwarzschild"}, {"params", {"M"}}},
                             json{{"metric", "desitter"}, {"params", {"H"}}}});
  j["lagrangians"] = json::array({json{{"lagrangian", "kawaguchi"}, {"params", {"A"}}},
                                  json{{"lagrangian", "test2"}, {"params", {"c"}}}});
  j["initial_generators"] = {"jet", "helix", "frame_helix", "orbit_helix"};
  j["suites"] = suites::suite_names();
  json sc = json::array();
  if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      json entry{{"file", p.string()}};
      try {
        const auto cfg = scenario::load_scenario(p);
        entry["name"] = cfg.name;
        entry["description"] = cfg.description;
        entry["kind"] = cfg.sweep ? "sweep" : "integrate";
      } catch (const std::exception& e) {
        entry["error"] = e.what();
      }
      sc.push_back(entry);
    }
  }
  j["scenarios"] = sc;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremal worldlines of curvature-dependent Lagrangians"};
  app.require_subcommand(1);

  IntegrateArgs ia;
  auto* integrate = app.add_subcommand("integrate", "Integrate one scenario");
  integrate->add_option("-c,--config", ia.config, "Scenario JSON")->required();
  integrate->add_option("-o,--out", ia.out, "Output directory (overrides output.dir)");
  integrate->add_option("--format", ia.format, "Trajectory format")->check(CLI::IsMember({"csv", "json"}));
  integrate->add_flag("--emit-plot-data", ia.plot, "Also write s, spatial coordinates and k2 for plotting");

  std::string suite = "all", report;
  std::uint64_t seed = 0;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::vector<std::string> choices = suites::suite_names();
  choices.push_back("all");
  verify->add_option("suite", suite, "Suite name")->check(CLI::IsMember(choices));
  verify->add_option("--report", report, "Write the reports as a JSON array");
  auto* seed_opt = verify->add_option("--seed", seed, "RNG seed (default WK_SEED or 42)");

  std::string sweep_cfg, sweep_out;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("-c,--config", sweep_cfg, "Scenario JSON with a sweep block")->required();
  sweep->add_option("-o,--out", sweep_out, "Output directory (overrides output.dir)");
  sweep->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string catalog_dir = WK_SCENARIO_DIR;
  auto* catalog = app.add_subcommand("catalog", "List built-in charts, Lagrangians, suites and scenarios");
  catalog->add_option("--dir", catalog_dir, "Scenario directory");

  std::string config_path;
  auto* config = app.add_subcommand("config", "Print the normalized form of a scenario");
  config->add_option("-c,--config", config_path, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*integrate) return cmd_integrate(ia);
    if (*verify) {
      if (*seed_opt) setenv("WK_SEED", std::to_string(seed).c_str(), 1);
      return cmd_verify(suite, report);
    }
    if (*sweep) return cmd_sweep(sweep_cfg, sweep_out, jobs);
    if (*catalog) return cmd_catalog(catalog_dir);
    if (*config) return cmd_config(config_path);
  } catch (const wk::Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
