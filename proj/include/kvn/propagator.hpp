#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kvn/dense.hpp"
#include "kvn/representation.hpp"

namespace kvn {

// Runtime guard tripped: phase-space amplitude reached the periodic boundary,
// the Fock tail filled up, or the norm drifted. Carries diagnostics for the
// caller to report.
class MonitorError : public std::runtime_error {
 public:
  MonitorError(std::string reason, long step, double value)
      : std::runtime_error("monitor trip: " + reason + " at step " + std::to_string(step) +
                           " (value " + std::to_string(value) + ")"),
        reason(std::move(reason)),
        step(step),
        value(value) {}

  std::string reason;
  long step;
  double value;
};

struct PropagatorConfig {
  enum class Method { Split, Dense };

  double dt = 1e-3;
  long n_steps = 2000;
  Method method = Method::Split;
  int record_every = 10;

  void validate() const;
  double t_final() const { return dt * static_cast<double>(n_steps); }
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // values[channel][sample]

  int add_channel(const std::string& label);
  const std::vector<double>* channel(const std::string& label) const;
  std::size_t n_samples() const { return times.size(); }
};

struct MonitorStats {
  double max_boundary = 0.0;
  double max_qtail = 0.0;
  double max_norm_dev = 0.0;
};

struct MonitorLimits {
  double boundary = 1e-8;
  double qtail = 1e-8;
  double norm_dev = 1e-9;
};

// An exactly exponentiable piece of the Hamiltonian: a real diagonal in the
// frame reached by the listed axis transforms plus an optional quantum-sector
// rotation.
struct SplitPart {
  std::string role;  // "quantum" | "classical" | "coupling"
  bool fft_a = false, fft_b = false, fft_q = false;
  std::vector<cplx> qrot;      // d x d row-major unitary, empty if none
  std::vector<double> lambda;  // eigenvalue per site in the frame
};

// Splits H into quantum-only, classical-only and coupling groups and realizes
// each group as a SplitPart. Throws DimensionError when a group is not
// exactly exponentiable (e.g. a classical word mixing b with at, or a
// coupling with neither a common classical word nor a common quantum word).
std::vector<SplitPart> build_split_parts(const OperatorPoly& h,
                                         const std::shared_ptr<const Representation>& rep);

struct Channel {
  std::string label;
  MatrixOperator op;
};

struct EvolveResult {
  TimeSeries series;
  HybridState final_state;
  MonitorStats monitors;
};

// Strang splitting with the fixed substep order
//   quantum(dt/2) classical(dt/2) coupling(dt) classical(dt/2) quantum(dt/2),
// absent parts skipped. Channels are sampled every record_every steps
// (including t = 0); monitors are checked every step.
EvolveResult evolve_split(const HybridState& initial, const std::vector<SplitPart>& parts,
                          const PropagatorConfig& cfg, const std::vector<Channel>& channels,
                          const std::shared_ptr<const Representation>& rep,
                          const MonitorLimits& limits = {});

// exp(-i H t) |initial> through the dense Hermitian eigendecomposition.
HybridState evolve_dense(const HybridState& initial, const MatrixOperator& h, double t,
                         std::size_t max_dim = 4096);

// Dense-oracle trajectory: each sample is computed exactly from the initial
// state (no step-to-step error accumulation); monitors are evaluated at the
// samples rather than every step.
EvolveResult evolve_dense_series(const HybridState& initial, const MatrixOperator& h,
                                 const PropagatorConfig& cfg, const std::vector<Channel>& channels,
                                 const std::shared_ptr<const Representation>& rep,
                                 const MonitorLimits& limits = {}, std::size_t max_dim = 4096);

struct EhrenfestEntry {
  std::string x_label;
  std::string rhs_label;
  double max_dev = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct EhrenfestReport {
  std::vector<EhrenfestEntry> entries;
  bool all_pass = true;
};

// Verifies d<X>/dt (centered second-order differences, endpoints excluded)
// against the recorded <rhs> channel. Tolerance is max(tol_floor, 10 h^2)
// with h the sample spacing of the series.
EhrenfestReport ehrenfest_check(const TimeSeries& ts,
                                const std::vector<std::pair<std::string, std::string>>& pairs,
                                double tol_floor = 1e-5);

}  // namespace kvn
