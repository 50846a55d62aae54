#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kvn/propagator.hpp"

namespace kvn {

enum class ScenarioKind { FreeClassical, MomentumMeter, EnergyMeter, SpinMeter };

std::string to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario(const std::string& name);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::FreeClassical;
  double m = 1.0;          // classical (apparatus) mass
  double g = 0.2;          // measurement coupling strength
  double epsilon_s3 = 0.0; // optional free spin Hamiltonian eps * S3
  GridSpec grid;
  // quantum sector (momentum/energy meters); omega = 0 selects the 1-D
  // q-grid variant used for calibration runs
  int n_levels = 16;
  double mu = 1.0;
  double omega = 1.0;
  double L_q = 8.0;
  GaussianParams initial;
  PropagatorConfig prop;

  QuantumSpec quantum_spec() const;
  Basis basis() const;
  void validate() const;
};

// Exact conversion of a config parameter to the rational the symbolic layer
// computes with: the double's shortest round-trip decimal is read back as a
// fraction, so 0.2 means exactly 1/5.
Rational rational_from_double(double x);

// The scenario Hamiltonian with exact rational coefficients.
OperatorPoly scenario_hamiltonian(const ScenarioConfig& cfg);

// Generators whose equations of motion the scenario reports and records.
std::vector<Gen> scenario_generators(ScenarioKind kind);

struct EomEntry {
  enum class Claim { None, Equals, ContainsTerm, Observable };

  std::string variable;
  std::string engine_rhs;   // canonical text of heisenberg_rhs(X, H)
  Claim claim = Claim::None;
  std::string paper_text;   // transcription of the printed line, if any
  std::string paper_rhs;    // canonical text of the comparison object
  bool match = true;        // vacuously true for Claim::None
  bool observable = false;
};

struct EOMReport {
  std::string scenario;
  std::string hamiltonian_text;
  bool hamiltonian_observable = false;  // expected false: H contains tildes
  std::vector<EomEntry> entries;
  bool all_match = true;
};

// Engine-derived equations of motion vs the transcribed printed ones.
// Mismatches are flagged and reported verbatim, never corrected.
EOMReport derive_eom_report(const ScenarioConfig& cfg);

struct Readout {
  bool valid = false;        // false when g = 0 (nothing to infer)
  std::string pointer;       // pointer channel label ("b", or "a" for energy)
  std::string measured;      // canonical text of the measured observable
  double coefficient = 0.0;  // engine-derived pointer-rate coefficient
  double fitted_rate = 0.0;  // least-squares slope of <pointer>(t)
  double rate_stderr = 0.0;
  double drift = 0.0;        // mean of the engine-derived free-drift channel
  double inferred = 0.0;     // (fitted_rate - drift) / coefficient
  double uncertainty = 0.0;  // rate_stderr / |coefficient|
  double shift_rate = 0.0;   // (<x(T)> - <x(0)>) / T
  double shift_inferred = 0.0;
};

struct RunResult {
  TimeSeries series;
  Readout readout;
  MonitorStats monitors;
  EOMReport eom;
  EhrenfestReport ehrenfest;
  std::map<std::string, double> final_values;
  HybridState final_state;
  std::vector<std::string> notes;
};

RunResult run_scenario(const ScenarioConfig& cfg);

// Channel set and Ehrenfest pairs used by run_scenario, exposed for the
// verification suites and oracles.
std::vector<Channel> scenario_channels(const ScenarioConfig& cfg,
                                       const std::shared_ptr<const Representation>& rep,
                                       const OperatorPoly& h,
                                       std::vector<std::pair<std::string, std::string>>* pairs);

struct DisturbanceReport {
  std::vector<double> g_values;          // first entry must be 0
  double max_q_deviation = 0.0;          // max_t |<q>_g(t) - <q>_0(t)| over g > 0
  std::vector<double> var_q_final;       // Var(q)(T) per g
  bool variance_monotone = false;        // strictly increasing with |g|
};

// Momentum-meter disturbance study: the mean <q> trajectory is unaffected
// while Var(q) grows with g^2.
DisturbanceReport disturbance_study(const ScenarioConfig& base, const std::vector<double>& gs);

// Hash of the structure table and generator order; stamped into every output.
std::string algebra_engine_version();

}  // namespace kvn
