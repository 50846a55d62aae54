#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvn/kernels.hpp"
#include "kvn/operator_poly.hpp"

namespace kvn {

class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Gaussian support reaching a periodic grid boundary would alias the
// coordinate-multiplication operators, so construction refuses it outright.
class SupportError : public std::runtime_error {
 public:
  explicit SupportError(const std::string& what) : std::runtime_error(what) {}
};

// Periodic phase-space grid for the classical (a, b) sector.
struct GridSpec {
  int n_a = 64;
  int n_b = 64;
  double L_a = 8.0;
  double L_b = 8.0;

  double da() const { return 2.0 * L_a / n_a; }
  double db() const { return 2.0 * L_b / n_b; }
  void validate() const;
};

enum class QuantumKind { None, Fock, QGrid, Spin };

// Quantum sector selection. A Fock spec with omega = 0 has no oscillator
// basis to expand in; the scenario layer maps that case to QGrid (a 1-D
// spatial grid with the same spectral-derivative machinery as the classical
// sector).
struct QuantumSpec {
  QuantumKind kind = QuantumKind::None;
  int n_levels = 16;   // Fock truncation, or q-grid points for QGrid
  double mu = 1.0;
  double omega = 1.0;
  double L_q = 8.0;    // half-width of the q grid (QGrid only)

  static QuantumSpec none();
  static QuantumSpec fock(int n_levels, double mu, double omega);
  static QuantumSpec qgrid(int n_points, double mu, double L_q);
  static QuantumSpec spin();

  int dim() const;
  double dq() const { return 2.0 * L_q / n_levels; }
  void validate() const;
};

struct Basis {
  GridSpec grid;
  QuantumSpec quantum;

  Shape3 shape() const { return {grid.n_a, grid.n_b, quantum.dim()}; }
  std::size_t dim() const { return shape().size(); }
  // grid measure of the inner product: da*db, times dq for a QGrid sector
  double measure() const;
  void validate() const;
};

class HybridState {
 public:
  explicit HybridState(const Basis& basis)
      : basis_(basis), amp_(basis.dim(), cplx(0.0, 0.0)) {}

  const Basis& basis() const { return basis_; }
  std::vector<cplx>& amp() { return amp_; }
  const std::vector<cplx>& amp() const { return amp_; }
  cplx* data() { return amp_.data(); }
  const cplx* data() const { return amp_.data(); }
  std::size_t size() const { return amp_.size(); }

  double norm() const;
  void normalize();

 private:
  Basis basis_;
  std::vector<cplx> amp_;
};

struct GaussianParams {
  double a0 = 0.0, b0 = 0.0;
  double sigma_a = 0.7, sigma_b = 0.7;
  // QGrid wavepacket
  double q0 = 0.0, p0 = 0.0, sigma_q = 0.7;
  // Fock sector: either a number state or a coherent state at (q0, p0)
  std::optional<int> fock_n;
  // spin direction; theta = 0 is up, theta = pi down
  double spin_theta = 0.0, spin_phi = 0.0;
};

class Representation;

// One normal-ordered monomial realized as a pipeline of axis-local actions:
// spectral (Fourier-diagonal) factors first, then grid diagonals, then the
// quantum-sector block. Summing the pipelines gives the operator.
struct MonomialAction {
  cplx coeff{0.0, 0.0};
  bool fft_a = false, fft_b = false;
  std::vector<double> spect_ab;  // (ka, kb)-diagonal, n_a*n_b, empty if absent
  std::vector<double> grid_ab;   // (a, b)-diagonal, empty if absent
  std::vector<cplx> qmat;        // Fock/spin block, d*d row-major, empty if identity
  std::vector<double> kq_diag;   // QGrid: k_q^pow_p, empty if absent
  std::vector<double> q_diag;    // QGrid: q^pow_q, empty if absent
};

class MatrixOperator {
 public:
  MatrixOperator() = default;

  const Basis& basis() const;
  std::size_t dim() const;

  // out = Op * in (out is overwritten; distinct storage required)
  void apply(const HybridState& in, HybridState& out) const;
  HybridState operator()(const HybridState& in) const;

  // dense column-major matrix; refuses dimensions above max_dim
  std::vector<cplx> materialize(std::size_t max_dim = 4096) const;

 private:
  friend class Representation;
  std::shared_ptr<const Representation> rep_;
  std::vector<MonomialAction> actions_;
};

// Concrete realization of the hybrid algebra on a chosen basis:
// a, b multiply by grid coordinates, at = -i d/db and bt = i d/da act as
// Fourier spectral derivatives, and the quantum sector is a truncated Fock
// space, a spin-1/2, or a 1-D spatial grid.
class Representation : public std::enable_shared_from_this<Representation> {
 public:
  static std::shared_ptr<const Representation> create(const Basis& basis);

  const Basis& basis() const { return basis_; }

  MatrixOperator assemble(const OperatorPoly& poly) const;

  const std::vector<double>& a_coords() const { return a_coords_; }
  const std::vector<double>& b_coords() const { return b_coords_; }
  const std::vector<double>& ka() const { return ka_; }
  const std::vector<double>& kb() const { return kb_; }
  const std::vector<double>& q_coords() const { return q_coords_; }
  const std::vector<double>& kq() const { return kq_; }

  const FftPlan& plan_a() const { return plan_a_; }
  const FftPlan& plan_b() const { return plan_b_; }
  const FftPlan& plan_q() const { return plan_q_; }

  // dense quantum-sector block of a quantum-only polynomial (Fock/spin)
  std::vector<cplx> quantum_block(const OperatorPoly& quantum_poly) const;
  std::vector<cplx> quantum_matrix(Gen g) const;

  // per-site monitor code, bit 0 = classical/grid boundary, bit 1 = Fock tail
  const std::vector<std::uint8_t>& monitor_code() const { return monitor_code_; }

 private:
  explicit Representation(const Basis& basis);

  Basis basis_;
  std::vector<double> a_coords_, b_coords_, ka_, kb_, q_coords_, kq_;
  FftPlan plan_a_, plan_b_, plan_q_;
  std::vector<std::uint8_t> monitor_code_;
};

// Normalized product state; throws SupportError when any Gaussian factor has
// its 5-sigma support outside the periodic box.
HybridState gaussian_state(const std::shared_ptr<const Representation>& rep,
                           const GaussianParams& params);

cplx expectation(const HybridState& state, const MatrixOperator& op);
// asserts the imaginary part is below tol (self-adjoint observables)
double expectation_real(const HybridState& state, const MatrixOperator& op,
                        double imag_tol = 1e-10);

}  // namespace kvn
