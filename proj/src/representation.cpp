#include "kvn/representation.hpp"

#include <cmath>

namespace kvn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> grid_coords(int n, double half_width) {
  std::vector<double> x(n);
  const double d = 2.0 * half_width / n;
  for (int i = 0; i < n; ++i) x[i] = -half_width + i * d;
  return x;
}

// standard FFT frequency layout: 0, 1, ..., n/2-1, -n/2, ..., -1 (times pi/L)
std::vector<double> fft_freqs(int n, double half_width) {
  std::vector<double> k(n);
  const double dk = kPi / half_width;
  for (int i = 0; i < n; ++i) {
    int s = i < n / 2 ? i : i - n;
    k[i] = s * dk;
  }
  return k;
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

void GridSpec::validate() const {
  if (n_a < 8 || n_b < 8 || !is_pow2(n_a) || !is_pow2(n_b))
    throw DimensionError("grid sizes must be powers of two >= 8");
  if (!(L_a > 0.0) || !(L_b > 0.0)) throw DimensionError("grid half-widths must be positive");
}

QuantumSpec QuantumSpec::none() {
  QuantumSpec s;
  s.kind = QuantumKind::None;
  s.n_levels = 1;
  return s;
}

QuantumSpec QuantumSpec::fock(int n_levels, double mu, double omega) {
  QuantumSpec s;
  s.kind = QuantumKind::Fock;
  s.n_levels = n_levels;
  s.mu = mu;
  s.omega = omega;
  return s;
}

QuantumSpec QuantumSpec::qgrid(int n_points, double mu, double L_q) {
  QuantumSpec s;
  s.kind = QuantumKind::QGrid;
  s.n_levels = n_points;
  s.mu = mu;
  s.omega = 0.0;
  s.L_q = L_q;
  return s;
}

QuantumSpec QuantumSpec::spin() {
  QuantumSpec s;
  s.kind = QuantumKind::Spin;
  s.n_levels = 2;
  return s;
}

int QuantumSpec::dim() const {
  switch (kind) {
    case QuantumKind::None: return 1;
    case QuantumKind::Spin: return 2;
    default: return n_levels;
  }
}

void QuantumSpec::validate() const {
  switch (kind) {
    case QuantumKind::None:
    case QuantumKind::Spin:
      return;
    case QuantumKind::Fock:
      if (n_levels < 2) throw DimensionError("Fock truncation needs n_levels >= 2");
      if (!(mu > 0.0)) throw DimensionError("quantum mass mu must be positive");
      if (!(omega > 0.0)) throw DimensionError("Fock basis needs omega > 0 (omega = 0 is the grid variant)");
      return;
    case QuantumKind::QGrid:
      if (n_levels < 8 || !is_pow2(n_levels))
        throw DimensionError("q-grid size must be a power of two >= 8");
      if (!(mu > 0.0)) throw DimensionError("quantum mass mu must be positive");
      if (!(L_q > 0.0)) throw DimensionError("q-grid half-width must be positive");
      return;
  }
}

double Basis::measure() const {
  double m = grid.da() * grid.db();
  if (quantum.kind == QuantumKind::QGrid) m *= quantum.dq();
  return m;
}

void Basis::validate() const {
  grid.validate();
  quantum.validate();
}

double HybridState::norm() const {
  return std::sqrt(kernels::sum_sq(data(), size()) * basis_.measure());
}

void HybridState::normalize() {
  double n = norm();
  if (n == 0.0) throw std::domain_error("cannot normalize the zero state");
  kernels::scale(data(), 1.0 / n, size());
}

Representation::Representation(const Basis& basis) : basis_(basis) {
  basis_.validate();
  a_coords_ = grid_coords(basis_.grid.n_a, basis_.grid.L_a);
  b_coords_ = grid_coords(basis_.grid.n_b, basis_.grid.L_b);
  ka_ = fft_freqs(basis_.grid.n_a, basis_.grid.L_a);
  kb_ = fft_freqs(basis_.grid.n_b, basis_.grid.L_b);
  plan_a_ = FftPlan(basis_.grid.n_a);
  plan_b_ = FftPlan(basis_.grid.n_b);
  if (basis_.quantum.kind == QuantumKind::QGrid) {
    q_coords_ = grid_coords(basis_.quantum.n_levels, basis_.quantum.L_q);
    kq_ = fft_freqs(basis_.quantum.n_levels, basis_.quantum.L_q);
    plan_q_ = FftPlan(basis_.quantum.n_levels);
  }

  const Shape3 sh = basis_.shape();
  monitor_code_.assign(sh.size(), 0);
  const int dq = sh.d_q;
  for (int ia = 0; ia < sh.n_a; ++ia)
    for (int ib = 0; ib < sh.n_b; ++ib) {
      const bool edge_ab = ia == 0 || ia == sh.n_a - 1 || ib == 0 || ib == sh.n_b - 1;
      for (int iq = 0; iq < dq; ++iq) {
        std::uint8_t code = 0;
        bool edge = edge_ab;
        if (basis_.quantum.kind == QuantumKind::QGrid && (iq == 0 || iq == dq - 1)) edge = true;
        if (edge) code |= 1;
        if (basis_.quantum.kind == QuantumKind::Fock && iq >= dq - 2) code |= 2;
        monitor_code_[(static_cast<std::size_t>(ia) * sh.n_b + ib) * dq + iq] = code;
      }
    }
}

std::shared_ptr<const Representation> Representation::create(const Basis& basis) {
  return std::shared_ptr<const Representation>(new Representation(basis));
}

std::vector<cplx> Representation::quantum_matrix(Gen g) const {
  const int d = basis_.quantum.dim();
  std::vector<cplx> m(static_cast<std::size_t>(d) * d, cplx(0.0, 0.0));
  const auto& qs = basis_.quantum;
  switch (basis_.quantum.kind) {
    case QuantumKind::Fock: {
      const double s = 1.0 / std::sqrt(2.0 * qs.mu * qs.omega);   // q ladder scale
      const double t = std::sqrt(qs.mu * qs.omega / 2.0);         // p ladder scale
      if (g == Gen::QHat) {
        for (int n = 0; n + 1 < d; ++n) {
          const double r = std::sqrt(static_cast<double>(n + 1)) * s;
          m[static_cast<std::size_t>(n) * d + n + 1] = r;
          m[static_cast<std::size_t>(n + 1) * d + n] = r;
        }
        return m;
      }
      if (g == Gen::PHat) {
        for (int n = 0; n + 1 < d; ++n) {
          const double r = std::sqrt(static_cast<double>(n + 1)) * t;
          m[static_cast<std::size_t>(n) * d + n + 1] = cplx(0.0, -r);
          m[static_cast<std::size_t>(n + 1) * d + n] = cplx(0.0, r);
        }
        return m;
      }
      break;
    }
    case QuantumKind::Spin: {
      if (g == Gen::S1) {
        m[1] = 0.5;
        m[2] = 0.5;
        return m;
      }
      if (g == Gen::S2) {
        m[1] = cplx(0.0, -0.5);
        m[2] = cplx(0.0, 0.5);
        return m;
      }
      if (g == Gen::S3) {
        m[0] = 0.5;
        m[3] = -0.5;
        return m;
      }
      break;
    }
    default:
      break;
  }
  throw DimensionError("generator " + std::string(gen_name(g)) +
                       " has no dense block in this quantum sector");
}

namespace {

std::vector<cplx> fock_ladder_matrix(Gen g, int dim, double mu, double omega) {
  std::vector<cplx> m(static_cast<std::size_t>(dim) * dim, cplx(0.0, 0.0));
  const double s = 1.0 / std::sqrt(2.0 * mu * omega);
  const double t = std::sqrt(mu * omega / 2.0);
  for (int n = 0; n + 1 < dim; ++n) {
    const double r = std::sqrt(static_cast<double>(n + 1));
    if (g == Gen::QHat) {
      m[static_cast<std::size_t>(n) * dim + n + 1] = r * s;
      m[static_cast<std::size_t>(n + 1) * dim + n] = r * s;
    } else {
      m[static_cast<std::size_t>(n) * dim + n + 1] = cplx(0.0, -r * t);
      m[static_cast<std::size_t>(n + 1) * dim + n] = cplx(0.0, r * t);
    }
  }
  return m;
}

}  // namespace

std::vector<cplx> Representation::quantum_block(const OperatorPoly& quantum_poly) const {
  const int d = basis_.quantum.dim();
  std::vector<cplx> acc(static_cast<std::size_t>(d) * d, cplx(0.0, 0.0));
  for (auto& [w, c] : quantum_poly.terms()) {
    // Fock words are multiplied in a space padded by the word degree and then
    // cropped, which makes the d x d block the exact truncation of the
    // untruncated product (the pad supplies every intermediate level the
    // product can reach). Spin matrices close on themselves, no pad needed.
    int deg = 0;
    for (auto& [g, p] : w) {
      if (!is_quantum(g))
        throw DimensionError("quantum_block expects a quantum-only polynomial");
      deg += p;
    }
    const bool fock = basis_.quantum.kind == QuantumKind::Fock;
    const int dp = fock ? d + deg : d;

    std::vector<cplx> prod;  // identity until first factor
    for (auto& [g, p] : w) {
      std::vector<cplx> gm;
      if (fock)
        gm = fock_ladder_matrix(g, dp, basis_.quantum.mu, basis_.quantum.omega);
      else
        gm = quantum_matrix(g);
      for (int k = 0; k < p; ++k) {
        if (prod.empty()) {
          prod = gm;
        } else {
          std::vector<cplx> next(static_cast<std::size_t>(dp) * dp, cplx(0.0, 0.0));
          for (int i = 0; i < dp; ++i)
            for (int l = 0; l < dp; ++l) {
              cplx v = prod[static_cast<std::size_t>(i) * dp + l];
              if (v == cplx(0.0, 0.0)) continue;
              for (int j = 0; j < dp; ++j)
                next[static_cast<std::size_t>(i) * dp + j] +=
                    v * gm[static_cast<std::size_t>(l) * dp + j];
            }
          prod = std::move(next);
        }
      }
    }
    const cplx cc = to_complex(c);
    if (prod.empty()) {
      for (int i = 0; i < d; ++i) acc[static_cast<std::size_t>(i) * d + i] += cc;
    } else {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          acc[static_cast<std::size_t>(i) * d + j] +=
              cc * prod[static_cast<std::size_t>(i) * dp + j];
    }
  }
  return acc;
}

MatrixOperator Representation::assemble(const OperatorPoly& poly) const {
  const Shape3 sh = basis_.shape();
  MatrixOperator op;
  op.rep_ = shared_from_this();

  for (auto& [w, c] : poly.terms()) {
    MonomialAction act;
    act.coeff = to_complex(c);

    int pow_a = 0, pow_b = 0, pow_at = 0, pow_bt = 0, pow_q = 0, pow_p = 0;
    OperatorPoly quantum_word;  // spin / Fock sub-word as a poly for quantum_block
    Word qw;
    for (auto& [g, p] : w) {
      switch (g) {
        case Gen::A: pow_a = p; break;
        case Gen::B: pow_b = p; break;
        case Gen::ATilde: pow_at = p; break;
        case Gen::BTilde: pow_bt = p; break;
        case Gen::QHat:
        case Gen::PHat:
          if (basis_.quantum.kind == QuantumKind::QGrid) {
            (g == Gen::QHat ? pow_q : pow_p) = p;
          } else if (basis_.quantum.kind == QuantumKind::Fock) {
            qw.push_back({g, p});
          } else {
            throw DimensionError("q/p generators need a Fock or grid quantum sector");
          }
          break;
        case Gen::S1:
        case Gen::S2:
        case Gen::S3:
          if (basis_.quantum.kind != QuantumKind::Spin)
            throw DimensionError("spin generators need the spin quantum sector");
          qw.push_back({g, p});
          break;
      }
    }

    if (pow_at > 0 || pow_bt > 0) {
      act.fft_b = pow_at > 0;
      act.fft_a = pow_bt > 0;
      act.spect_ab.resize(static_cast<std::size_t>(sh.n_a) * sh.n_b);
      for (int ia = 0; ia < sh.n_a; ++ia)
        for (int ib = 0; ib < sh.n_b; ++ib)
          act.spect_ab[static_cast<std::size_t>(ia) * sh.n_b + ib] =
              ipow(kb_[ib], pow_at) * ipow(-ka_[ia], pow_bt);
    }
    if (pow_a > 0 || pow_b > 0) {
      act.grid_ab.resize(static_cast<std::size_t>(sh.n_a) * sh.n_b);
      for (int ia = 0; ia < sh.n_a; ++ia)
        for (int ib = 0; ib < sh.n_b; ++ib)
          act.grid_ab[static_cast<std::size_t>(ia) * sh.n_b + ib] =
              ipow(a_coords_[ia], pow_a) * ipow(b_coords_[ib], pow_b);
    }
    if (!qw.empty()) {
      OperatorPoly qword;
      qword.add_term(qw, RationalComplex(1));
      act.qmat = quantum_block(qword);
    }
    if (pow_p > 0) {
      act.kq_diag.resize(sh.d_q);
      for (int iq = 0; iq < sh.d_q; ++iq) act.kq_diag[iq] = ipow(kq_[iq], pow_p);
    }
    if (pow_q > 0) {
      act.q_diag.resize(sh.d_q);
      for (int iq = 0; iq < sh.d_q; ++iq) act.q_diag[iq] = ipow(q_coords_[iq], pow_q);
    }
    op.actions_.push_back(std::move(act));
  }
  return op;
}

const Basis& MatrixOperator::basis() const {
  if (!rep_) throw DimensionError("empty operator");
  return rep_->basis();
}

std::size_t MatrixOperator::dim() const { return basis().dim(); }

void MatrixOperator::apply(const HybridState& in, HybridState& out) const {
  if (!rep_) throw DimensionError("empty operator");
  const Shape3 sh = rep_->basis().shape();
  const std::size_t n = in.size();
  if (out.size() != n) throw DimensionError("operator/state dimension mismatch");

  std::fill(out.amp().begin(), out.amp().end(), cplx(0.0, 0.0));
  std::vector<cplx> buf(n);

  for (const auto& act : actions_) {
    std::copy(in.amp().begin(), in.amp().end(), buf.begin());

    // spectral factors (rightmost in the word, applied first)
    if (act.fft_a) kernels::fft_axis(buf.data(), sh, Axis::A, rep_->plan_a(), false);
    if (act.fft_b) kernels::fft_axis(buf.data(), sh, Axis::B, rep_->plan_b(), false);
    if (!act.spect_ab.empty()) kernels::multiply_real_ab(buf.data(), act.spect_ab.data(), sh);
    if (act.fft_b) kernels::fft_axis(buf.data(), sh, Axis::B, rep_->plan_b(), true);
    if (act.fft_a) kernels::fft_axis(buf.data(), sh, Axis::A, rep_->plan_a(), true);

    if (!act.grid_ab.empty()) kernels::multiply_real_ab(buf.data(), act.grid_ab.data(), sh);

    // quantum sector: p-part first, then q-part, then dense block
    if (!act.kq_diag.empty()) {
      kernels::fft_axis(buf.data(), sh, Axis::Q, rep_->plan_q(), false);
      kernels::multiply_real_q(buf.data(), act.kq_diag.data(), sh);
      kernels::fft_axis(buf.data(), sh, Axis::Q, rep_->plan_q(), true);
    }
    if (!act.q_diag.empty()) kernels::multiply_real_q(buf.data(), act.q_diag.data(), sh);
    if (!act.qmat.empty()) kernels::quantum_apply(buf.data(), sh, act.qmat.data(), false);

    kernels::accumulate_scaled(out.data(), buf.data(), act.coeff, n);
  }
}

HybridState MatrixOperator::operator()(const HybridState& in) const {
  HybridState out(in.basis());
  apply(in, out);
  return out;
}

std::vector<cplx> MatrixOperator::materialize(std::size_t max_dim) const {
  const std::size_t n = dim();
  if (n > max_dim)
    throw DimensionError("dimension " + std::to_string(n) + " exceeds dense limit " +
                         std::to_string(max_dim));
  std::vector<cplx> mat(n * n);
  HybridState unit(basis()), col(basis());
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(unit.amp().begin(), unit.amp().end(), cplx(0.0, 0.0));
    unit.amp()[j] = 1.0;
    apply(unit, col);
    // column-major for LAPACK
    std::copy(col.amp().begin(), col.amp().end(), mat.begin() + j * n);
  }
  return mat;
}

HybridState gaussian_state(const std::shared_ptr<const Representation>& rep,
                           const GaussianParams& p) {
  const Basis& basis = rep->basis();
  const Shape3 sh = basis.shape();

  auto check_support = [](const char* axis, double c, double sigma, double half_width) {
    if (!(sigma > 0.0)) throw SupportError(std::string("sigma_") + axis + " must be positive");
    if (c - 5.0 * sigma < -half_width || c + 5.0 * sigma > half_width)
      throw SupportError(std::string("gaussian support (5 sigma) along ") + axis +
                         " reaches the grid boundary");
  };
  check_support("a", p.a0, p.sigma_a, basis.grid.L_a);
  check_support("b", p.b0, p.sigma_b, basis.grid.L_b);

  std::vector<double> fa(sh.n_a), fb(sh.n_b);
  for (int i = 0; i < sh.n_a; ++i) {
    const double x = rep->a_coords()[i] - p.a0;
    fa[i] = std::exp(-x * x / (4.0 * p.sigma_a * p.sigma_a));
  }
  for (int i = 0; i < sh.n_b; ++i) {
    const double x = rep->b_coords()[i] - p.b0;
    fb[i] = std::exp(-x * x / (4.0 * p.sigma_b * p.sigma_b));
  }

  std::vector<cplx> fq(sh.d_q, cplx(1.0, 0.0));
  switch (basis.quantum.kind) {
    case QuantumKind::None:
      break;
    case QuantumKind::QGrid: {
      check_support("q", p.q0, p.sigma_q, basis.quantum.L_q);
      for (int i = 0; i < sh.d_q; ++i) {
        const double q = rep->q_coords()[i];
        const double x = q - p.q0;
        fq[i] = std::exp(-x * x / (4.0 * p.sigma_q * p.sigma_q)) *
                cplx(std::cos(p.p0 * q), std::sin(p.p0 * q));
      }
      break;
    }
    case QuantumKind::Fock: {
      std::fill(fq.begin(), fq.end(), cplx(0.0, 0.0));
      if (p.fock_n) {
        if (*p.fock_n < 0 || *p.fock_n >= sh.d_q)
          throw DimensionError("fock_n outside the truncated basis");
        fq[*p.fock_n] = 1.0;
      } else {
        // coherent state at (q0, p0)
        const double mu_omega = basis.quantum.mu * basis.quantum.omega;
        const cplx alpha(std::sqrt(mu_omega / 2.0) * p.q0, p.p0 / std::sqrt(2.0 * mu_omega));
        cplx amp = std::exp(-0.5 * std::norm(alpha));
        for (int n = 0; n < sh.d_q; ++n) {
          fq[n] = amp;
          amp *= alpha / std::sqrt(static_cast<double>(n + 1));
        }
      }
      break;
    }
    case QuantumKind::Spin: {
      fq[0] = std::cos(p.spin_theta / 2.0);
      fq[1] = std::sin(p.spin_theta / 2.0) * cplx(std::cos(p.spin_phi), std::sin(p.spin_phi));
      break;
    }
  }

  HybridState state(basis);
  cplx* amp = state.data();
  for (int ia = 0; ia < sh.n_a; ++ia)
    for (int ib = 0; ib < sh.n_b; ++ib) {
      const double w = fa[ia] * fb[ib];
      cplx* row = amp + (static_cast<std::size_t>(ia) * sh.n_b + ib) * sh.d_q;
      for (int iq = 0; iq < sh.d_q; ++iq) row[iq] = w * fq[iq];
    }
  state.normalize();
  return state;
}

cplx expectation(const HybridState& state, const MatrixOperator& op) {
  if (state.size() != op.dim()) throw DimensionError("expectation: dimension mismatch");
  HybridState tmp(state.basis());
  op.apply(state, tmp);
  return kernels::dot(state.data(), tmp.data(), state.size()) * state.basis().measure();
}

double expectation_real(const HybridState& state, const MatrixOperator& op, double imag_tol) {
  const cplx v = expectation(state, op);
  if (std::abs(v.imag()) > imag_tol)
    throw std::runtime_error("expectation of a self-adjoint operator came out complex (imag = " +
                             std::to_string(v.imag()) + ")");
  return v.real();
}

}  // namespace kvn
