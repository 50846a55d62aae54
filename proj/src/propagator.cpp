#include "kvn/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace kvn {

void PropagatorConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
}

int TimeSeries::add_channel(const std::string& label) {
  labels.push_back(label);
  values.emplace_back();
  return static_cast<int>(labels.size()) - 1;
}

const std::vector<double>* TimeSeries::channel(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return &values[i];
  return nullptr;
}

namespace {

struct MonomialParts {
  cplx coeff;
  Word quantum_word;
  Word classical_word;
};

// diagonal value of a classical word at (ia, ib) in its spectral/grid frame
double classical_word_value(const Word& w, const Representation& rep, int ia, int ib) {
  double v = 1.0;
  for (auto& [g, p] : w) {
    double base = 0.0;
    switch (g) {
      case Gen::A: base = rep.a_coords()[ia]; break;
      case Gen::B: base = rep.b_coords()[ib]; break;
      case Gen::ATilde: base = rep.kb()[ib]; break;
      case Gen::BTilde: base = -rep.ka()[ia]; break;
      default: throw DimensionError("not a classical generator");
    }
    for (int k = 0; k < p; ++k) v *= base;
  }
  return v;
}

struct ClassicalFrame {
  bool uses_a = false, uses_b = false, uses_at = false, uses_bt = false;

  void absorb(const Word& w) {
    for (auto& [g, p] : w) {
      if (g == Gen::A) uses_a = true;
      if (g == Gen::B) uses_b = true;
      if (g == Gen::ATilde) uses_at = true;
      if (g == Gen::BTilde) uses_bt = true;
    }
  }
  void check_exponentiable() const {
    // [b, at] and [a, bt] do not vanish, so such mixtures have no common
    // diagonal frame
    if ((uses_b && uses_at) || (uses_a && uses_bt))
      throw DimensionError("classical part is not exactly exponentiable "
                           "(mixes a coordinate with its conjugate derivative)");
  }
};

double real_coeff(const cplx& c, const char* what) {
  if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c.real())))
    throw DimensionError(std::string("non-Hermitian ") + what + " in split part");
  return c.real();
}

// quantum sub-word diagonal for the QGrid sector: pure q-word or pure p-word
struct QGridDiag {
  bool uses_q = false, uses_p = false;
  std::vector<double> diag;
};

QGridDiag qgrid_word_diag(const Word& w, const Representation& rep) {
  QGridDiag out;
  const int d = rep.basis().quantum.dim();
  out.diag.assign(d, 1.0);
  for (auto& [g, p] : w) {
    if (g == Gen::QHat) out.uses_q = true;
    if (g == Gen::PHat) out.uses_p = true;
    const std::vector<double>& base = g == Gen::QHat ? rep.q_coords() : rep.kq();
    for (int iq = 0; iq < d; ++iq)
      for (int k = 0; k < p; ++k) out.diag[iq] *= base[iq];
  }
  if (out.uses_q && out.uses_p)
    throw DimensionError("q-grid quantum part mixing q with p is not exactly exponentiable");
  return out;
}

std::vector<double> lambda_cube(const Shape3& sh, const std::vector<double>& lam_ab,
                                const std::vector<double>& lam_q) {
  std::vector<double> cube(sh.size());
  for (int ia = 0; ia < sh.n_a; ++ia)
    for (int ib = 0; ib < sh.n_b; ++ib) {
      const double w = lam_ab[static_cast<std::size_t>(ia) * sh.n_b + ib];
      double* row = cube.data() + (static_cast<std::size_t>(ia) * sh.n_b + ib) * sh.d_q;
      for (int iq = 0; iq < sh.d_q; ++iq) row[iq] = w * lam_q[iq];
    }
  return cube;
}

std::vector<cplx> col_to_row_major(const std::vector<cplx>& col, int d) {
  std::vector<cplx> row(col.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      row[static_cast<std::size_t>(i) * d + j] = col[static_cast<std::size_t>(j) * d + i];
  return row;
}

SplitPart make_quantum_part(const std::vector<MonomialParts>& terms, const Representation& rep) {
  SplitPart part;
  part.role = "quantum";
  const Shape3 sh = rep.basis().shape();
  std::vector<double> lam_ab(static_cast<std::size_t>(sh.n_a) * sh.n_b, 1.0);
  std::vector<double> lam_q(sh.d_q, 0.0);

  if (rep.basis().quantum.kind == QuantumKind::QGrid) {
    bool uses_q = false, uses_p = false;
    for (const auto& t : terms) {
      QGridDiag qd = qgrid_word_diag(t.quantum_word, rep);
      uses_q |= qd.uses_q;
      uses_p |= qd.uses_p;
      if (uses_q && uses_p)
        throw DimensionError("q-grid quantum part mixing q with p is not exactly exponentiable");
      const double c = real_coeff(t.coeff, "quantum part");
      for (int iq = 0; iq < sh.d_q; ++iq) lam_q[iq] += c * qd.diag[iq];
    }
    part.fft_q = uses_p;
  } else {
    // Fock or spin: diagonalize the dense block of the summed sub-polynomial
    OperatorPoly qpoly;
    for (const auto& t : terms) {
      OperatorPoly mono;
      // coefficient is exact in the caller's poly; rebuild from the complex
      // value is avoided by passing words through quantum_block per term
      mono.add_term(t.quantum_word, RationalComplex(1));
      std::vector<cplx> block = rep.quantum_block(mono);
      const int d = sh.d_q;
      if (part.qrot.empty()) part.qrot.assign(static_cast<std::size_t>(d) * d, cplx(0.0, 0.0));
      for (std::size_t i = 0; i < block.size(); ++i) part.qrot[i] += t.coeff * block[i];
    }
    // part.qrot currently holds the Hermitian block; diagonalize it
    const int d = sh.d_q;
    std::vector<cplx> colmajor(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        colmajor[static_cast<std::size_t>(j) * d + i] = part.qrot[static_cast<std::size_t>(i) * d + j];
    HermitianEig eig = eigh(std::move(colmajor), d);
    lam_q = eig.eigval;
    part.qrot = col_to_row_major(eig.vectors, d);
  }

  part.lambda = lambda_cube(sh, lam_ab, lam_q);
  return part;
}

SplitPart make_classical_part(const std::vector<MonomialParts>& terms, const Representation& rep) {
  SplitPart part;
  part.role = "classical";
  const Shape3 sh = rep.basis().shape();

  ClassicalFrame frame;
  for (const auto& t : terms) frame.absorb(t.classical_word);
  frame.check_exponentiable();
  part.fft_a = frame.uses_bt;
  part.fft_b = frame.uses_at;

  std::vector<double> lam_ab(static_cast<std::size_t>(sh.n_a) * sh.n_b, 0.0);
  for (const auto& t : terms) {
    const double c = real_coeff(t.coeff, "classical part");
    for (int ia = 0; ia < sh.n_a; ++ia)
      for (int ib = 0; ib < sh.n_b; ++ib)
        lam_ab[static_cast<std::size_t>(ia) * sh.n_b + ib] +=
            c * classical_word_value(t.classical_word, rep, ia, ib);
  }
  std::vector<double> lam_q(sh.d_q, 1.0);
  part.lambda = lambda_cube(sh, lam_ab, lam_q);
  return part;
}

SplitPart make_coupling_part(const std::vector<MonomialParts>& terms, const Representation& rep) {
  SplitPart part;
  part.role = "coupling";
  const Shape3 sh = rep.basis().shape();

  const bool common_classical =
      std::all_of(terms.begin(), terms.end(),
                  [&](const MonomialParts& t) { return t.classical_word == terms[0].classical_word; });
  const bool common_quantum =
      std::all_of(terms.begin(), terms.end(),
                  [&](const MonomialParts& t) { return t.quantum_word == terms[0].quantum_word; });
  if (!common_classical && !common_quantum)
    throw DimensionError("coupling is not exactly exponentiable "
                         "(no common classical or quantum factor)");

  ClassicalFrame frame;
  for (const auto& t : terms) frame.absorb(t.classical_word);
  frame.check_exponentiable();
  part.fft_a = frame.uses_bt;
  part.fft_b = frame.uses_at;

  std::vector<double> lam_ab(static_cast<std::size_t>(sh.n_a) * sh.n_b, 0.0);
  std::vector<double> lam_q(sh.d_q, 0.0);

  if (common_classical) {
    // (sum of quantum blocks) tensor (one classical word)
    for (int ia = 0; ia < sh.n_a; ++ia)
      for (int ib = 0; ib < sh.n_b; ++ib)
        lam_ab[static_cast<std::size_t>(ia) * sh.n_b + ib] =
            classical_word_value(terms[0].classical_word, rep, ia, ib);

    if (rep.basis().quantum.kind == QuantumKind::QGrid) {
      bool uses_q = false, uses_p = false;
      for (const auto& t : terms) {
        QGridDiag qd = qgrid_word_diag(t.quantum_word, rep);
        uses_q |= qd.uses_q;
        uses_p |= qd.uses_p;
        if (uses_q && uses_p)
          throw DimensionError("q-grid coupling mixing q with p is not exactly exponentiable");
        const double c = real_coeff(t.coeff, "coupling");
        for (int iq = 0; iq < sh.d_q; ++iq) lam_q[iq] += c * qd.diag[iq];
      }
      part.fft_q = uses_p;
    } else {
      const int d = sh.d_q;
      std::vector<cplx> block(static_cast<std::size_t>(d) * d, cplx(0.0, 0.0));
      for (const auto& t : terms) {
        OperatorPoly mono;
        mono.add_term(t.quantum_word, RationalComplex(1));
        std::vector<cplx> b = rep.quantum_block(mono);
        for (std::size_t i = 0; i < b.size(); ++i) block[i] += t.coeff * b[i];
      }
      std::vector<cplx> colmajor(static_cast<std::size_t>(d) * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          colmajor[static_cast<std::size_t>(j) * d + i] = block[static_cast<std::size_t>(i) * d + j];
      HermitianEig eig = eigh(std::move(colmajor), d);
      lam_q = eig.eigval;
      part.qrot = col_to_row_major(eig.vectors, d);
    }
  } else {
    // (one quantum word) tensor (sum of classical words)
    for (const auto& t : terms) {
      const double c = real_coeff(t.coeff, "coupling");
      for (int ia = 0; ia < sh.n_a; ++ia)
        for (int ib = 0; ib < sh.n_b; ++ib)
          lam_ab[static_cast<std::size_t>(ia) * sh.n_b + ib] +=
              c * classical_word_value(t.classical_word, rep, ia, ib);
    }
    if (rep.basis().quantum.kind == QuantumKind::QGrid) {
      QGridDiag qd = qgrid_word_diag(terms[0].quantum_word, rep);
      part.fft_q = qd.uses_p;
      lam_q = qd.diag;
    } else {
      OperatorPoly mono;
      mono.add_term(terms[0].quantum_word, RationalComplex(1));
      std::vector<cplx> block = rep.quantum_block(mono);
      const int d = sh.d_q;
      std::vector<cplx> colmajor(static_cast<std::size_t>(d) * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          colmajor[static_cast<std::size_t>(j) * d + i] = block[static_cast<std::size_t>(i) * d + j];
      HermitianEig eig = eigh(std::move(colmajor), d);
      lam_q = eig.eigval;
      part.qrot = col_to_row_major(eig.vectors, d);
    }
  }

  part.lambda = lambda_cube(sh, lam_ab, lam_q);
  return part;
}

void apply_part(HybridState& state, const SplitPart& part, const std::vector<cplx>& phases,
                const Representation& rep) {
  const Shape3 sh = rep.basis().shape();
  cplx* d = state.data();
  if (part.fft_a) kernels::fft_axis(d, sh, Axis::A, rep.plan_a(), false);
  if (part.fft_b) kernels::fft_axis(d, sh, Axis::B, rep.plan_b(), false);
  if (part.fft_q) kernels::fft_axis(d, sh, Axis::Q, rep.plan_q(), false);
  if (!part.qrot.empty()) kernels::quantum_apply(d, sh, part.qrot.data(), true);
  kernels::multiply_phase(d, phases.data(), state.size());
  if (!part.qrot.empty()) kernels::quantum_apply(d, sh, part.qrot.data(), false);
  if (part.fft_q) kernels::fft_axis(d, sh, Axis::Q, rep.plan_q(), true);
  if (part.fft_b) kernels::fft_axis(d, sh, Axis::B, rep.plan_b(), true);
  if (part.fft_a) kernels::fft_axis(d, sh, Axis::A, rep.plan_a(), true);
}

std::vector<cplx> phase_table(const SplitPart& part, double tau) {
  std::vector<cplx> phases(part.lambda.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double ang = -tau * part.lambda[i];
    phases[i] = cplx(std::cos(ang), std::sin(ang));
  }
  return phases;
}

void record_sample(TimeSeries& ts, double t, const HybridState& state,
                   const std::vector<Channel>& channels, const StateSums& sums,
                   double measure) {
  ts.times.push_back(t);
  std::size_t c = 0;
  for (; c < channels.size(); ++c)
    ts.values[c].push_back(expectation_real(state, channels[c].op));
  ts.values[c++].push_back(std::sqrt(sums.norm_sq * measure));
  ts.values[c++].push_back(sums.boundary_sq * measure);
  ts.values[c].push_back(sums.qtail_sq * measure);
}

void check_monitors(const StateSums& sums, double measure, long step, const MonitorLimits& lim,
                    MonitorStats& stats) {
  const double boundary = sums.boundary_sq * measure;
  const double qtail = sums.qtail_sq * measure;
  const double norm_dev = std::abs(std::sqrt(sums.norm_sq * measure) - 1.0);
  stats.max_boundary = std::max(stats.max_boundary, boundary);
  stats.max_qtail = std::max(stats.max_qtail, qtail);
  stats.max_norm_dev = std::max(stats.max_norm_dev, norm_dev);
  if (boundary > lim.boundary) throw MonitorError("leakage", step, boundary);
  if (qtail > lim.qtail) throw MonitorError("truncation", step, qtail);
  if (norm_dev > lim.norm_dev) throw MonitorError("norm", step, norm_dev);
}

TimeSeries make_series(const std::vector<Channel>& channels) {
  TimeSeries ts;
  for (const auto& c : channels) ts.add_channel(c.label);
  ts.add_channel("norm");
  ts.add_channel("leakage");
  ts.add_channel("fock_tail");
  return ts;
}

}  // namespace

std::vector<SplitPart> build_split_parts(const OperatorPoly& h,
                                         const std::shared_ptr<const Representation>& rep) {
  std::vector<MonomialParts> quantum_terms, classical_terms, coupling_terms;

  for (auto& [w, c] : h.terms()) {
    MonomialParts mp;
    mp.coeff = to_complex(c);
    for (auto& [g, p] : w) {
      if (is_quantum(g))
        mp.quantum_word.push_back({g, p});
      else
        mp.classical_word.push_back({g, p});
    }
    if (mp.quantum_word.empty() && mp.classical_word.empty())
      quantum_terms.push_back(mp);  // constant: a global phase, fold anywhere
    else if (mp.classical_word.empty())
      quantum_terms.push_back(mp);
    else if (mp.quantum_word.empty())
      classical_terms.push_back(mp);
    else
      coupling_terms.push_back(mp);
  }

  std::vector<SplitPart> parts;
  if (!quantum_terms.empty()) parts.push_back(make_quantum_part(quantum_terms, *rep));
  if (!classical_terms.empty()) parts.push_back(make_classical_part(classical_terms, *rep));
  if (!coupling_terms.empty()) parts.push_back(make_coupling_part(coupling_terms, *rep));
  return parts;
}

EvolveResult evolve_split(const HybridState& initial, const std::vector<SplitPart>& parts,
                          const PropagatorConfig& cfg, const std::vector<Channel>& channels,
                          const std::shared_ptr<const Representation>& rep,
                          const MonitorLimits& limits) {
  cfg.validate();
  const double measure = rep->basis().measure();

  const SplitPart* quantum = nullptr;
  const SplitPart* classical = nullptr;
  const SplitPart* coupling = nullptr;
  for (const auto& p : parts) {
    if (p.role == "quantum") quantum = &p;
    if (p.role == "classical") classical = &p;
    if (p.role == "coupling") coupling = &p;
  }

  std::vector<cplx> ph_quantum, ph_classical, ph_coupling;
  if (quantum) ph_quantum = phase_table(*quantum, cfg.dt / 2.0);
  if (classical) ph_classical = phase_table(*classical, cfg.dt / 2.0);
  if (coupling) ph_coupling = phase_table(*coupling, cfg.dt);

  EvolveResult result{make_series(channels), initial, MonitorStats{}};
  HybridState& state = result.final_state;

  StateSums sums = kernels::masked_sums(state.data(), rep->monitor_code().data(), state.size());
  check_monitors(sums, measure, 0, limits, result.monitors);
  record_sample(result.series, 0.0, state, channels, sums, measure);

  for (long step = 1; step <= cfg.n_steps; ++step) {
    if (quantum) apply_part(state, *quantum, ph_quantum, *rep);
    if (classical) apply_part(state, *classical, ph_classical, *rep);
    if (coupling) apply_part(state, *coupling, ph_coupling, *rep);
    if (classical) apply_part(state, *classical, ph_classical, *rep);
    if (quantum) apply_part(state, *quantum, ph_quantum, *rep);

    sums = kernels::masked_sums(state.data(), rep->monitor_code().data(), state.size());
    check_monitors(sums, measure, step, limits, result.monitors);
    if (step % cfg.record_every == 0)
      record_sample(result.series, step * cfg.dt, state, channels, sums, measure);
  }
  return result;
}

HybridState evolve_dense(const HybridState& initial, const MatrixOperator& h, double t,
                         std::size_t max_dim) {
  const std::size_t n = initial.size();
  HermitianEig eig = eigh(h.materialize(max_dim), static_cast<int>(n));
  HybridState out(initial.basis());
  dense_evolve(eig, t, initial.data(), out.data());
  return out;
}

EvolveResult evolve_dense_series(const HybridState& initial, const MatrixOperator& h,
                                 const PropagatorConfig& cfg, const std::vector<Channel>& channels,
                                 const std::shared_ptr<const Representation>& rep,
                                 const MonitorLimits& limits, std::size_t max_dim) {
  cfg.validate();
  const double measure = rep->basis().measure();
  const std::size_t n = initial.size();
  HermitianEig eig = eigh(h.materialize(max_dim), static_cast<int>(n));

  EvolveResult result{make_series(channels), initial, MonitorStats{}};
  HybridState& state = result.final_state;

  for (long step = 0; step <= cfg.n_steps; ++step) {
    const bool sample = step % cfg.record_every == 0 || step == cfg.n_steps;
    if (!sample) continue;
    const double t = step * cfg.dt;
    dense_evolve(eig, t, initial.data(), state.data());
    StateSums sums = kernels::masked_sums(state.data(), rep->monitor_code().data(), n);
    check_monitors(sums, measure, step, limits, result.monitors);
    if (step % cfg.record_every == 0)
      record_sample(result.series, t, state, channels, sums, measure);
  }
  return result;
}

EhrenfestReport ehrenfest_check(const TimeSeries& ts,
                                const std::vector<std::pair<std::string, std::string>>& pairs,
                                double tol_floor) {
  EhrenfestReport report;
  if (ts.times.size() < 3) throw std::invalid_argument("ehrenfest_check needs >= 3 samples");
  const double h = ts.times[1] - ts.times[0];
  const double tol = std::max(tol_floor, 10.0 * h * h);

  for (const auto& [xl, rl] : pairs) {
    const auto* x = ts.channel(xl);
    const auto* r = ts.channel(rl);
    if (!x || !r)
      throw std::invalid_argument("ehrenfest_check: missing channel " + (x ? rl : xl));
    EhrenfestEntry e{xl, rl, 0.0, tol, false};
    for (std::size_t k = 1; k + 1 < x->size(); ++k) {
      const double fd = ((*x)[k + 1] - (*x)[k - 1]) / (ts.times[k + 1] - ts.times[k - 1]);
      e.max_dev = std::max(e.max_dev, std::abs(fd - (*r)[k]));
    }
    e.pass = e.max_dev <= tol;
    report.all_pass = report.all_pass && e.pass;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace kvn
