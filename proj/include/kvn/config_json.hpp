#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "kvn/scenarios.hpp"

namespace kvn {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct LoadedConfig {
  ScenarioConfig scenario;
  std::string out_dir;  // empty unless the config carries one
  json sweep;           // null unless present (sweep command only)
  json resolved;        // fully resolved configuration echo
};

// Strict parse: unknown keys anywhere are a hard error, every physical
// parameter must be a finite number, defaults are applied only to the
// documented optional keys and the resolved config is echoed back.
LoadedConfig load_config(const json& j, bool allow_sweep = false);
LoadedConfig load_config_file(const std::string& path, bool allow_sweep = false);

json resolved_config_json(const ScenarioConfig& cfg, const std::string& out_dir);

json eom_report_json(const EOMReport& report, const json& resolved_cfg);
json run_result_json(const RunResult& result, const json& resolved_cfg);
json monitor_trip_json(const MonitorError& err, const json& resolved_cfg);

// header t,<channel>,... ; one row per sample; full double precision; LF endings
void write_trajectory_csv(const TimeSeries& ts, std::ostream& os);

std::string format_double(double x);  // %.17g, '.' decimal separator

}  // namespace kvn
