#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kvn/config_json.hpp"

using namespace kvn;
namespace fs = std::filesystem;

namespace {

json minimal_momentum() {
  return json::parse(R"({
    "scenario": "momentum_meter",
    "g": 0.2,
    "grid": {"n_a": 8, "n_b": 16, "L_a": 4.0, "L_b": 5.0},
    "quantum": {"n_levels": 8, "mu": 1.0, "omega": 1.0},
    "initial": {"sigma_a": 0.45, "sigma_b": 0.6, "q0": 0.4, "p0": 0.2},
    "propagator": {"dt": 0.001, "t_final": 0.1, "record_every": 10}
  })");
}

}  // namespace

TEST_CASE("config defaults are applied and echoed") {
  const LoadedConfig lc = load_config(minimal_momentum());
  CHECK(lc.scenario.kind == ScenarioKind::MomentumMeter);
  CHECK(lc.scenario.m == 1.0);  // default
  CHECK(lc.scenario.prop.n_steps == 100);
  CHECK(lc.resolved["m"] == 1.0);
  CHECK(lc.resolved["propagator"]["n_steps"] == 100);
  CHECK(lc.resolved["propagator"]["method"] == "split");
  CHECK(lc.resolved["quantum"]["sector"] == "fock");
  CHECK(lc.resolved["initial"]["q0"] == 0.4);
}

TEST_CASE("unknown keys are a hard error at any depth") {
  json j = minimal_momentum();
  j["tpyo"] = 1.0;
  CHECK_THROWS_AS(load_config(j), ConfigError);

  j = minimal_momentum();
  j["initial"]["sigma_c"] = 0.5;
  CHECK_THROWS_AS(load_config(j), ConfigError);

  j = minimal_momentum();
  j["propagator"]["dt_max"] = 0.1;
  CHECK_THROWS_AS(load_config(j), ConfigError);
}

TEST_CASE("scenario-inapplicable keys are rejected") {
  json j = minimal_momentum();
  j["initial"]["spin"] = "up";  // not a spin meter
  CHECK_THROWS_AS(load_config(j), ConfigError);

  j = json::parse(R"({"scenario": "free_classical", "g": 0.1})");
  CHECK_THROWS_AS(load_config(j), ConfigError);  // free scenario has no coupling

  j = json::parse(R"({"scenario": "spin_meter", "quantum": {"n_levels": 8}})");
  CHECK_THROWS_AS(load_config(j), ConfigError);  // spin meter forbids a Fock sector

  j = minimal_momentum();
  j["epsilon_s3"] = 0.1;
  CHECK_THROWS_AS(load_config(j), ConfigError);

  j = minimal_momentum();
  j["initial"]["fock_n"] = 1;  // excludes q0/p0
  CHECK_THROWS_AS(load_config(j), ConfigError);
}

TEST_CASE("physical parameters must be finite numbers") {
  json j = minimal_momentum();
  j["g"] = "strong";
  CHECK_THROWS_AS(load_config(j), ConfigError);
  j = minimal_momentum();
  j["m"] = -1.0;
  CHECK_THROWS_AS(load_config(j), ConfigError);
  j = minimal_momentum();
  j["propagator"]["t_final"] = 0.0015;  // not a whole number of steps
  CHECK_THROWS_AS(load_config(j), ConfigError);
}

TEST_CASE("spin presets resolve to bloch angles") {
  json j = json::parse(R"({
    "scenario": "spin_meter", "g": 0.4,
    "grid": {"n_a": 16, "n_b": 32, "L_a": 5.0, "L_b": 8.0},
    "initial": {"sigma_a": 0.45, "sigma_b": 0.6, "spin": "plus"},
    "propagator": {"dt": 0.002, "t_final": 2.0}
  })");
  const LoadedConfig lc = load_config(j);
  CHECK(lc.scenario.initial.spin_theta == doctest::Approx(1.5707963267948966));
  CHECK(lc.resolved["initial"]["spin_theta"] == doctest::Approx(1.5707963267948966));

  j["initial"]["spin"] = "sideways";
  CHECK_THROWS_AS(load_config(j), ConfigError);
}

TEST_CASE("sweep sections are accepted only when asked for") {
  json j = minimal_momentum();
  j["sweep"] = {{"g", {0.1, 0.2}}};
  CHECK_THROWS_AS(load_config(j, /*allow_sweep=*/false), ConfigError);
  const LoadedConfig lc = load_config(j, /*allow_sweep=*/true);
  CHECK(lc.sweep.is_object());
  CHECK(lc.sweep["g"].size() == 2);
}

TEST_CASE("trajectory csv format: header, LF endings, full precision") {
  TimeSeries ts;
  ts.times = {0.0, 0.1, 0.2};
  ts.add_channel("b");
  ts.values[0] = {1.0 / 3.0, -2.5e-17, 4.0};
  std::ostringstream os;
  write_trajectory_csv(ts, os);
  const std::string csv = os.str();
  CHECK(csv.find("t,b\n") == 0);
  CHECK(csv.find('\r') == std::string::npos);
  // every double round-trips exactly through the printed text
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  const auto comma = line.find(',');
  CHECK(std::strtod(line.substr(comma + 1).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("identical config and build give byte-identical outputs") {
  json j = minimal_momentum();
  auto run_once = [&] {
    const LoadedConfig lc = load_config(j);
    RunResult rr = run_scenario(lc.scenario);
    std::ostringstream csv;
    write_trajectory_csv(rr.series, csv);
    return std::pair{csv.str(), run_result_json(rr, lc.resolved).dump(2)};
  };
  const auto [csv1, json1] = run_once();
  const auto [csv2, json2] = run_once();
  CHECK(csv1 == csv2);
  CHECK(json1 == json2);
  CHECK(json1.find(algebra_engine_version()) != std::string::npos);
}

TEST_CASE("eom report json carries entries, flags and the engine version") {
  const LoadedConfig lc = load_config(minimal_momentum());
  const EOMReport report = derive_eom_report(lc.scenario);
  const json j = eom_report_json(report, lc.resolved);
  CHECK(j["scenario"] == "momentum_meter");
  CHECK(j["all_match"] == false);
  CHECK(j["hamiltonian"]["observable"] == false);
  bool found_q = false;
  for (const auto& e : j["entries"]) {
    if (e["variable"] == "q") {
      found_q = true;
      CHECK(e["observable"] == false);
      CHECK(e["match"] == true);
    }
  }
  CHECK(found_q);
  CHECK(j["engine_version"] == algebra_engine_version());
}

// The remaining cases drive the installed binary; they run when ctest provides
// KVN_BIN (and a scratch dir via KVN_TMP).
namespace {

struct BinEnv {
  std::string bin;
  fs::path tmp;
  bool ok = false;
};

BinEnv bin_env() {
  BinEnv env;
  const char* bin = std::getenv("KVN_BIN");
  if (!bin) return env;
  env.bin = bin;
  env.tmp = fs::temp_directory_path() / "kvn_cli_test";
  fs::create_directories(env.tmp);
  env.ok = true;
  return env;
}

int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("binary: derive exits 3 on mismatching printed lines, 0 otherwise") {
  const BinEnv env = bin_env();
  if (!env.ok) return;

  const fs::path mom = env.tmp / "mom.json";
  std::ofstream(mom) << minimal_momentum().dump(2);
  CHECK(run_cmd(env.bin + " derive " + mom.string() + " > " + (env.tmp / "mom_eom.json").string()) == 3);

  const fs::path spin = env.tmp / "spin.json";
  std::ofstream(spin) << R"({
    "scenario": "spin_meter", "g": 0.4,
    "grid": {"n_a": 16, "n_b": 32, "L_a": 5.0, "L_b": 8.0},
    "initial": {"sigma_a": 0.45, "sigma_b": 0.6, "spin": "up"},
    "propagator": {"dt": 0.002, "t_final": 0.1}
  })";
  CHECK(run_cmd(env.bin + " derive " + spin.string() + " > /dev/null") == 0);
}

TEST_CASE("binary: evolve writes trajectory.csv and result.json; bad input exits 1") {
  const BinEnv env = bin_env();
  if (!env.ok) return;

  const fs::path cfg = env.tmp / "run.json";
  std::ofstream(cfg) << minimal_momentum().dump(2);
  const fs::path out = env.tmp / "out";
  CHECK(run_cmd(env.bin + " evolve " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "result.json"));

  // determinism through the full binary: rerun the identical invocation
  // (the output directory is part of the echoed config, so it must match too)
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string csv1 = slurp(out / "trajectory.csv");
  const std::string json1 = slurp(out / "result.json");
  fs::remove_all(out);
  CHECK(run_cmd(env.bin + " evolve " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(slurp(out / "trajectory.csv") == csv1);
  CHECK(slurp(out / "result.json") == json1);

  json bad = minimal_momentum();
  bad["unknown_key"] = 1;
  const fs::path badcfg = env.tmp / "bad.json";
  std::ofstream(badcfg) << bad.dump(2);
  CHECK(run_cmd(env.bin + " evolve " + badcfg.string() + " --out " + (env.tmp / "nope").string()) == 1);
}

TEST_CASE("binary: unwritable output directory exits 2, monitor trip exits 4") {
  const BinEnv env = bin_env();
  if (!env.ok) return;

  const fs::path cfg = env.tmp / "run2.json";
  std::ofstream(cfg) << minimal_momentum().dump(2);
  if (run_cmd("test -w /") != 0) {  // only meaningful when not running as root
    CHECK(run_cmd(env.bin + " evolve " + cfg.string() + " --out /kvn_forbidden") == 2);
  }

  // a packet advected into the boundary trips the leakage monitor: exit 4
  const fs::path trip = env.tmp / "trip.json";
  std::ofstream(trip) << R"({
    "scenario": "free_classical",
    "grid": {"n_a": 32, "n_b": 32, "L_a": 8.0, "L_b": 8.0},
    "initial": {"a0": 2.0, "b0": 4.0, "sigma_a": 0.5, "sigma_b": 0.5},
    "propagator": {"dt": 0.01, "t_final": 3.0}
  })";
  const fs::path tripout = env.tmp / "tripout";
  CHECK(run_cmd(env.bin + " evolve " + trip.string() + " --out " + tripout.string()) == 4);
  std::ifstream rj(tripout / "result.json");
  json result = json::parse(rj);
  CHECK(result["completed"] == false);
  CHECK(result["monitors"]["tripped"] == true);
  CHECK(result["monitors"]["reason"] == "leakage");
}

TEST_CASE("binary: sweep produces one directory per cartesian point") {
  const BinEnv env = bin_env();
  if (!env.ok) return;

  json j = minimal_momentum();
  j["sweep"] = {{"g", {0.1, 0.2}}, {"initial.p0", {0.1, 0.2, 0.3}}};
  const fs::path cfg = env.tmp / "sweep.json";
  std::ofstream(cfg) << j.dump(2);
  const fs::path out = env.tmp / "sweep_out";
  CHECK(run_cmd(env.bin + " sweep " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "sweep_manifest.json"));
  int dirs = 0;
  for (auto& e : fs::directory_iterator(out))
    if (e.is_directory()) ++dirs;
  CHECK(dirs == 6);
  std::ifstream mf(out / "sweep_manifest.json");
  json manifest = json::parse(mf);
  CHECK(manifest["points"].size() == 6);
  CHECK(fs::exists(out / "point_0003" / "trajectory.csv"));
}
