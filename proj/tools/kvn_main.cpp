#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "kvn/config_json.hpp"
#include "kvn/verify.hpp"

namespace fs = std::filesystem;

namespace {

// exit codes: 0 ok, 1 config error, 2 internal/io error, 3 derive mismatch,
// 4 monitor trip, 5 verify failure

int cmd_derive(const std::string& config_path) {
  kvn::LoadedConfig lc = kvn::load_config_file(config_path);
  const kvn::EOMReport report = kvn::derive_eom_report(lc.scenario);
  std::cout << kvn::eom_report_json(report, lc.resolved).dump(2) << "\n";
  return report.all_match ? 0 : 3;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << content;
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

int run_one_evolve(const kvn::LoadedConfig& lc, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() +
                                   "': " + ec.message());
  try {
    kvn::RunResult result = kvn::run_scenario(lc.scenario);
    std::ostringstream csv;
    kvn::write_trajectory_csv(result.series, csv);
    write_file(out_dir / "trajectory.csv", csv.str());
    write_file(out_dir / "result.json",
               kvn::run_result_json(result, lc.resolved).dump(2) + "\n");
    return 0;
  } catch (const kvn::MonitorError& err) {
    write_file(out_dir / "result.json",
               kvn::monitor_trip_json(err, lc.resolved).dump(2) + "\n");
    std::cerr << "monitor trip: " << err.reason << " at step " << err.step << "\n";
    return 4;
  }
}

int cmd_evolve(const std::string& config_path, std::string out_dir) {
  kvn::LoadedConfig lc = kvn::load_config_file(config_path);
  if (out_dir.empty()) out_dir = lc.out_dir;
  if (out_dir.empty())
    throw kvn::ConfigError("no output directory: pass --out or set out_dir in the config");
  lc.resolved["out_dir"] = out_dir;  // echo the effective destination
  return run_one_evolve(lc, out_dir);
}

int cmd_verify(const std::string& level_name) {
  kvn::VerifyLevel level;
  if (level_name == "fast")
    level = kvn::VerifyLevel::Fast;
  else if (level_name == "full")
    level = kvn::VerifyLevel::Full;
  else
    throw kvn::ConfigError("--level must be 'fast' or 'full'");

  const kvn::VerifyReport report = kvn::run_verify(level);
  kvn::json j;
  j["level"] = level_name;
  j["engine_version"] = kvn::algebra_engine_version();
  kvn::json checks = kvn::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"suite", c.suite},
                      {"name", c.name},
                      {"pass", c.pass},
                      {"detail", c.detail},
                      {"seconds", c.seconds}});
  j["checks"] = checks;
  j["all_pass"] = report.all_pass();
  std::cout << j.dump(2) << "\n";
  return report.all_pass() ? 0 : 5;
}

// dotted-path patch into the raw config json ("initial.a0" etc.)
void apply_patch(kvn::json& j, const std::string& path, const kvn::json& value) {
  kvn::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw kvn::ConfigError("bad sweep key '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = kvn::json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

int cmd_sweep(const std::string& config_path, std::string out_root) {
  std::ifstream in(config_path);
  if (!in) throw kvn::ConfigError("cannot open config file '" + config_path + "'");
  kvn::json raw;
  try {
    raw = kvn::json::parse(in);
  } catch (const std::exception& e) {
    throw kvn::ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  kvn::LoadedConfig base = kvn::load_config(raw, /*allow_sweep=*/true);
  if (base.sweep.is_null()) throw kvn::ConfigError("sweep command needs a 'sweep' section");
  if (out_root.empty()) out_root = base.out_dir;
  if (out_root.empty())
    throw kvn::ConfigError("no output directory: pass --out or set out_dir in the config");

  std::vector<std::pair<std::string, kvn::json>> axes;
  for (auto it = base.sweep.begin(); it != base.sweep.end(); ++it) {
    if (!it.value().is_array() || it.value().empty())
      throw kvn::ConfigError("sweep." + it.key() + " must be a non-empty array");
    axes.push_back({it.key(), it.value()});
  }

  kvn::json patched_base = raw;
  patched_base.erase("sweep");

  std::size_t total = 1;
  for (const auto& [key, values] : axes) total *= values.size();

  kvn::json manifest;
  manifest["engine_version"] = kvn::algebra_engine_version();
  manifest["points"] = kvn::json::array();
  bool any_trip = false;

  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t point = 0; point < total; ++point) {
    kvn::json cfg_json = patched_base;
    kvn::json params;
    for (std::size_t ax = 0; ax < axes.size(); ++ax) {
      apply_patch(cfg_json, axes[ax].first, axes[ax].second[idx[ax]]);
      params[axes[ax].first] = axes[ax].second[idx[ax]];
    }
    char name[32];
    std::snprintf(name, sizeof(name), "point_%04zu", point);
    const fs::path dir = fs::path(out_root) / name;

    kvn::LoadedConfig lc = kvn::load_config(cfg_json);
    const int rc = run_one_evolve(lc, dir);
    any_trip = any_trip || rc == 4;
    manifest["points"].push_back({{"dir", name},
                                  {"params", params},
                                  {"status", rc == 0 ? "ok" : "monitor_trip"}});

    for (std::size_t ax = axes.size(); ax-- > 0;) {
      if (++idx[ax] < axes[ax].second.size()) break;
      idx[ax] = 0;
    }
  }
  write_file(fs::path(out_root) / "sweep_manifest.json", manifest.dump(2) + "\n");
  return any_trip ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  kvn::apply_thread_cap();

  CLI::App app{"hybrid quantum-classical measurement dynamics on the KvN Hilbert space"};
  app.require_subcommand(1);

  std::string config_path, out_dir, level = "fast";

  CLI::App* derive = app.add_subcommand("derive", "symbolic equations of motion report (JSON)");
  derive->add_option("config", config_path, "scenario config (JSON)")->required();

  CLI::App* evolve = app.add_subcommand("evolve", "run a scenario, write trajectory.csv + result.json");
  evolve->add_option("config", config_path, "scenario config (JSON)")->required();
  evolve->add_option("--out", out_dir, "output directory");

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
  verify->add_option("--level", level, "fast|full")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "cartesian sweep, one output dir per point");
  sweep->add_option("config", config_path, "scenario config with a 'sweep' section")->required();
  sweep->add_option("--out", out_dir, "output root directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (derive->parsed()) return cmd_derive(config_path);
    if (evolve->parsed()) return cmd_evolve(config_path, out_dir);
    if (verify->parsed()) return cmd_verify(level);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
  } catch (const kvn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const kvn::MonitorError& e) {
    std::cerr << "monitor trip: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
