#include "kvn/config_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

namespace kvn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Tracks which keys of an object were consumed; anything left over is an
// unknown key and a hard error (silently ignored physics parameters are worse
// than a failed run).
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    if (obj_.contains(key)) {
      seen_.insert(key);
      return true;
    }
    return false;
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    return number_required(key);
  }

  double number_required(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError(path_ + "." + key + " is required");
    seen_.insert(key);
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(path_ + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path_ + "." + key + " must be finite");
    return x;
  }

  long long integer(const std::string& key, long long def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path_ + "." + key + " must be an integer");
    return v.get<long long>();
  }

  std::string str(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(path_ + "." + key + " must be a string");
    return v.get<std::string>();
  }

  const json* sub(const std::string& key) {
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  void finish() {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("unknown key '" + path_ + "." + it.key() + "'");
  }

  const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_grid(Section& root, GridSpec& grid) {
  if (const json* sub = root.sub("grid")) {
    Section s(*sub, "grid");
    grid.n_a = static_cast<int>(s.integer("n_a", grid.n_a));
    grid.n_b = static_cast<int>(s.integer("n_b", grid.n_b));
    grid.L_a = s.number("L_a", grid.L_a);
    grid.L_b = s.number("L_b", grid.L_b);
    s.finish();
  }
}

void parse_quantum(Section& root, ScenarioConfig& cfg) {
  const bool applicable =
      cfg.kind == ScenarioKind::MomentumMeter || cfg.kind == ScenarioKind::EnergyMeter;
  if (const json* sub = root.sub("quantum")) {
    if (!applicable)
      throw ConfigError("'quantum' section does not apply to scenario " + to_string(cfg.kind));
    Section s(*sub, "quantum");
    cfg.n_levels = static_cast<int>(s.integer("n_levels", cfg.n_levels));
    cfg.mu = s.number("mu", cfg.mu);
    cfg.omega = s.number("omega", cfg.omega);
    cfg.L_q = s.number("L_q", cfg.L_q);
    s.finish();
  }
}

void parse_initial(Section& root, ScenarioConfig& cfg) {
  GaussianParams& init = cfg.initial;
  if (const json* sub = root.sub("initial")) {
    Section s(*sub, "initial");
    init.a0 = s.number("a0", init.a0);
    init.b0 = s.number("b0", init.b0);
    init.sigma_a = s.number("sigma_a", init.sigma_a);
    init.sigma_b = s.number("sigma_b", init.sigma_b);

    const bool quantum_meter =
        cfg.kind == ScenarioKind::MomentumMeter || cfg.kind == ScenarioKind::EnergyMeter;
    if (quantum_meter) {
      const bool has_fock = s.has("fock_n");
      if (has_fock) {
        if (cfg.omega == 0.0)
          throw ConfigError("initial.fock_n needs an oscillator sector (omega > 0)");
        const long long n = s.integer("fock_n", 0);
        if (n < 0) throw ConfigError("initial.fock_n must be >= 0");
        init.fock_n = static_cast<int>(n);
        if (s.has("q0") || s.has("p0") || s.has("sigma_q"))
          throw ConfigError("initial.fock_n excludes q0/p0/sigma_q");
      } else {
        init.q0 = s.number("q0", init.q0);
        init.p0 = s.number("p0", init.p0);
        if (cfg.omega == 0.0)
          init.sigma_q = s.number("sigma_q", init.sigma_q);
        else if (s.has("sigma_q"))
          throw ConfigError("initial.sigma_q applies only to the omega = 0 grid variant "
                            "(coherent-state width is fixed by mu and omega)");
      }
    } else if (s.has("q0") || s.has("p0") || s.has("sigma_q") || s.has("fock_n")) {
      throw ConfigError("quantum initial-state keys do not apply to scenario " +
                        to_string(cfg.kind));
    }

    if (cfg.kind == ScenarioKind::SpinMeter) {
      const std::string spin = s.str("spin", "up");
      if (spin == "up") {
        init.spin_theta = 0.0;
        init.spin_phi = 0.0;
      } else if (spin == "down") {
        init.spin_theta = kPi;
        init.spin_phi = 0.0;
      } else if (spin == "plus") {
        init.spin_theta = kPi / 2.0;
        init.spin_phi = 0.0;
      } else {
        throw ConfigError("initial.spin must be one of up, down, plus");
      }
    } else if (s.has("spin")) {
      throw ConfigError("initial.spin applies only to the spin meter");
    }
    s.finish();
  }
}

void parse_propagator(Section& root, PropagatorConfig& prop) {
  double t_final = 2.0;
  if (const json* sub = root.sub("propagator")) {
    Section s(*sub, "propagator");
    prop.dt = s.number("dt", prop.dt);
    t_final = s.number("t_final", t_final);
    prop.record_every = static_cast<int>(s.integer("record_every", prop.record_every));
    const std::string method = s.str("method", "split");
    if (method == "split")
      prop.method = PropagatorConfig::Method::Split;
    else if (method == "dense")
      prop.method = PropagatorConfig::Method::Dense;
    else
      throw ConfigError("propagator.method must be 'split' or 'dense'");
    s.finish();
  }
  if (!(prop.dt > 0.0)) throw ConfigError("propagator.dt must be positive");
  if (!(t_final > 0.0)) throw ConfigError("propagator.t_final must be positive");
  prop.n_steps = std::llround(t_final / prop.dt);
  if (prop.n_steps < 1 || std::abs(prop.n_steps * prop.dt - t_final) > 1e-9 * std::max(1.0, t_final))
    throw ConfigError("propagator.t_final must be a whole number of dt steps");
}

}  // namespace

LoadedConfig load_config(const json& j, bool allow_sweep) {
  Section root(j, "config");
  LoadedConfig out;

  const std::string name = root.str("scenario", "");
  const auto kind = parse_scenario(name);
  if (!kind)
    throw ConfigError("scenario must be one of free_classical, momentum_meter, energy_meter, "
                      "spin_meter (got '" + name + "')");
  ScenarioConfig& cfg = out.scenario;
  cfg.kind = *kind;

  cfg.m = root.number("m", cfg.m);
  const bool is_meter = cfg.kind != ScenarioKind::FreeClassical;
  if (root.has("g") && !is_meter) throw ConfigError("'g' does not apply to free_classical");
  cfg.g = is_meter ? root.number("g", cfg.g) : 0.0;
  if (root.has("epsilon_s3") && cfg.kind != ScenarioKind::SpinMeter)
    throw ConfigError("'epsilon_s3' applies only to the spin meter");
  cfg.epsilon_s3 = root.number("epsilon_s3", 0.0);

  parse_grid(root, cfg.grid);
  parse_quantum(root, cfg);
  parse_initial(root, cfg);
  parse_propagator(root, cfg.prop);

  out.out_dir = root.str("out_dir", "");
  if (root.has("sweep")) {
    if (!allow_sweep) throw ConfigError("'sweep' is only accepted by the sweep command");
    out.sweep = j.at("sweep");
    if (!out.sweep.is_object() || out.sweep.empty())
      throw ConfigError("sweep must be a non-empty object of key -> array of values");
  }
  root.finish();

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  out.resolved = resolved_config_json(cfg, out.out_dir);
  return out;
}

LoadedConfig load_config_file(const std::string& path, bool allow_sweep) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return load_config(j, allow_sweep);
}

json resolved_config_json(const ScenarioConfig& cfg, const std::string& out_dir) {
  json j;
  j["scenario"] = to_string(cfg.kind);
  j["m"] = cfg.m;
  const bool is_meter = cfg.kind != ScenarioKind::FreeClassical;
  if (is_meter) j["g"] = cfg.g;
  if (cfg.kind == ScenarioKind::SpinMeter) j["epsilon_s3"] = cfg.epsilon_s3;
  j["grid"] = {{"n_a", cfg.grid.n_a}, {"n_b", cfg.grid.n_b}, {"L_a", cfg.grid.L_a},
               {"L_b", cfg.grid.L_b}};
  if (cfg.kind == ScenarioKind::MomentumMeter || cfg.kind == ScenarioKind::EnergyMeter) {
    j["quantum"] = {{"n_levels", cfg.n_levels}, {"mu", cfg.mu}, {"omega", cfg.omega}};
    if (cfg.omega == 0.0) j["quantum"]["L_q"] = cfg.L_q;
    j["quantum"]["sector"] = cfg.omega == 0.0 ? "grid" : "fock";
  }
  json init;
  init["a0"] = cfg.initial.a0;
  init["b0"] = cfg.initial.b0;
  init["sigma_a"] = cfg.initial.sigma_a;
  init["sigma_b"] = cfg.initial.sigma_b;
  if (cfg.kind == ScenarioKind::MomentumMeter || cfg.kind == ScenarioKind::EnergyMeter) {
    if (cfg.initial.fock_n) {
      init["fock_n"] = *cfg.initial.fock_n;
    } else {
      init["q0"] = cfg.initial.q0;
      init["p0"] = cfg.initial.p0;
      if (cfg.omega == 0.0) init["sigma_q"] = cfg.initial.sigma_q;
    }
  }
  if (cfg.kind == ScenarioKind::SpinMeter) {
    init["spin_theta"] = cfg.initial.spin_theta;
    init["spin_phi"] = cfg.initial.spin_phi;
  }
  j["initial"] = init;
  j["propagator"] = {{"dt", cfg.prop.dt},
                     {"n_steps", cfg.prop.n_steps},
                     {"t_final", cfg.prop.t_final()},
                     {"method", cfg.prop.method == PropagatorConfig::Method::Split ? "split" : "dense"},
                     {"record_every", cfg.prop.record_every}};
  if (!out_dir.empty()) j["out_dir"] = out_dir;
  return j;
}

namespace {

json eom_entry_json(const EomEntry& e) {
  json j;
  j["variable"] = e.variable;
  j["engine_rhs"] = e.engine_rhs;
  j["observable"] = e.observable;
  switch (e.claim) {
    case EomEntry::Claim::None:
      j["paper_claim"] = "none";
      break;
    case EomEntry::Claim::Equals:
      j["paper_claim"] = "equals";
      break;
    case EomEntry::Claim::ContainsTerm:
      j["paper_claim"] = "contains_term";
      break;
    case EomEntry::Claim::Observable:
      j["paper_claim"] = "observable";
      break;
  }
  if (e.claim != EomEntry::Claim::None) {
    j["paper_text"] = e.paper_text;
    if (!e.paper_rhs.empty()) j["paper_rhs"] = e.paper_rhs;
    j["match"] = e.match;
  }
  return j;
}

json ehrenfest_json(const EhrenfestReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"variable", e.x_label},
                       {"rhs_channel", e.rhs_label},
                       {"max_deviation", e.max_dev},
                       {"tolerance", e.tol},
                       {"pass", e.pass}});
  return {{"all_pass", r.all_pass}, {"entries", entries}};
}

}  // namespace

json eom_report_json(const EOMReport& report, const json& resolved_cfg) {
  json j;
  j["scenario"] = report.scenario;
  j["engine_version"] = algebra_engine_version();
  j["config"] = resolved_cfg;
  j["hamiltonian"] = {{"text", report.hamiltonian_text},
                      {"observable", report.hamiltonian_observable}};
  json entries = json::array();
  for (const auto& e : report.entries) entries.push_back(eom_entry_json(e));
  j["entries"] = entries;
  j["all_match"] = report.all_match;
  return j;
}

json run_result_json(const RunResult& result, const json& resolved_cfg) {
  json j;
  j["scenario"] = result.eom.scenario;
  j["engine_version"] = algebra_engine_version();
  j["config"] = resolved_cfg;
  j["completed"] = true;

  if (result.readout.valid) {
    const Readout& ro = result.readout;
    j["readout"] = {{"pointer", ro.pointer},
                    {"measured", ro.measured},
                    {"coefficient", ro.coefficient},
                    {"fitted_rate", ro.fitted_rate},
                    {"rate_stderr", ro.rate_stderr},
                    {"drift", ro.drift},
                    {"inferred_value", ro.inferred},
                    {"inferred_uncertainty", ro.uncertainty},
                    {"shift_rate", ro.shift_rate},
                    {"shift_inferred_value", ro.shift_inferred}};
    if (result.eom.scenario == "momentum_meter") j["inferred_momentum"] = ro.inferred;
    if (result.eom.scenario == "energy_meter") j["inferred_energy"] = ro.inferred;
  } else {
    j["readout"] = nullptr;
  }

  j["monitors"] = {{"max_boundary_mass", result.monitors.max_boundary},
                   {"max_fock_tail", result.monitors.max_qtail},
                   {"max_norm_deviation", result.monitors.max_norm_dev},
                   {"tripped", false}};
  j["ehrenfest"] = ehrenfest_json(result.ehrenfest);
  j["eom"] = eom_report_json(result.eom, json::object());
  j["eom"].erase("config");
  json finals = json::object();
  for (const auto& [k, v] : result.final_values) finals[k] = v;
  j["final"] = finals;
  j["notes"] = result.notes;
  return j;
}

json monitor_trip_json(const MonitorError& err, const json& resolved_cfg) {
  json j;
  j["engine_version"] = algebra_engine_version();
  j["config"] = resolved_cfg;
  j["completed"] = false;
  j["monitors"] = {{"tripped", true},
                   {"reason", err.reason},
                   {"step", err.step},
                   {"value", err.value}};
  return j;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(const TimeSeries& ts, std::ostream& os) {
  os << "t";
  for (const auto& label : ts.labels) os << "," << label;
  os << "\n";
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    os << format_double(ts.times[k]);
    for (const auto& col : ts.values) os << "," << format_double(col[k]);
    os << "\n";
  }
}

}  // namespace kvn
