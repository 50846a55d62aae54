#include "kvn/scenarios.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

namespace kvn {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FreeClassical: return "free_classical";
    case ScenarioKind::MomentumMeter: return "momentum_meter";
    case ScenarioKind::EnergyMeter: return "energy_meter";
    case ScenarioKind::SpinMeter: return "spin_meter";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario(const std::string& name) {
  if (name == "free_classical") return ScenarioKind::FreeClassical;
  if (name == "momentum_meter") return ScenarioKind::MomentumMeter;
  if (name == "energy_meter") return ScenarioKind::EnergyMeter;
  if (name == "spin_meter") return ScenarioKind::SpinMeter;
  return std::nullopt;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("parameter must be a finite number");
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc{}) throw std::invalid_argument("cannot format parameter");
  std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));

  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';

  long long digits = 0;
  int frac_digits = 0;
  bool in_frac = false;
  long long exp10 = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') {
      in_frac = true;
    } else if (c == 'e' || c == 'E') {
      long long e = 0;
      auto r = std::from_chars(s.data() + i + 1, s.data() + s.size(), e);
      if (r.ec != std::errc{}) throw std::invalid_argument("bad exponent in parameter");
      exp10 = e;
      break;
    } else if (c >= '0' && c <= '9') {
      digits = detail::checked_add(detail::checked_mul(digits, 10), c - '0');
      if (in_frac) ++frac_digits;
    } else {
      throw std::invalid_argument("cannot parse parameter decimal");
    }
  }
  const long long net = exp10 - frac_digits;
  if (net < -18 || net > 18)
    throw std::invalid_argument("parameter magnitude outside exact-rational range");
  long long num = neg ? -digits : digits;
  long long den = 1;
  for (long long k = 0; k < net; ++k) num = detail::checked_mul(num, 10);
  for (long long k = 0; k < -net; ++k) den = detail::checked_mul(den, 10);
  return Rational(num, den);
}

QuantumSpec ScenarioConfig::quantum_spec() const {
  switch (kind) {
    case ScenarioKind::FreeClassical:
      return QuantumSpec::none();
    case ScenarioKind::SpinMeter:
      return QuantumSpec::spin();
    case ScenarioKind::MomentumMeter:
    case ScenarioKind::EnergyMeter:
      return omega == 0.0 ? QuantumSpec::qgrid(n_levels, mu, L_q)
                          : QuantumSpec::fock(n_levels, mu, omega);
  }
  throw std::logic_error("bad scenario kind");
}

Basis ScenarioConfig::basis() const { return Basis{grid, quantum_spec()}; }

void ScenarioConfig::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument("classical mass m must be positive");
  if (!std::isfinite(g)) throw std::invalid_argument("coupling g must be finite");
  if (!(omega >= 0.0)) throw std::invalid_argument("omega must be >= 0");
  basis().validate();
  prop.validate();
}

namespace {

OperatorPoly word_poly(Word w, RationalComplex c) {
  OperatorPoly p;
  p.add_term(std::move(w), c);
  return p;
}

// p^2/(2 mu) + mu omega^2 q^2 / 2 with exact coefficients
OperatorPoly quantum_oscillator_poly(const Rational& mu_r, const Rational& omega_r) {
  OperatorPoly h = word_poly({{Gen::PHat, 2}}, Rational(1) / (Rational(2) * mu_r));
  const Rational kq = mu_r * omega_r * omega_r / Rational(2);
  if (!kq.is_zero()) h += word_poly({{Gen::QHat, 2}}, kq);
  return h;
}

}  // namespace

OperatorPoly scenario_hamiltonian(const ScenarioConfig& cfg) {
  const Rational m_r = rational_from_double(cfg.m);
  const Rational g_r = rational_from_double(cfg.g);
  const Rational inv_m = Rational(1) / m_r;

  OperatorPoly h = word_poly({{Gen::A, 1}, {Gen::ATilde, 1}}, inv_m);  // a at / m

  switch (cfg.kind) {
    case ScenarioKind::FreeClassical:
      break;
    case ScenarioKind::MomentumMeter: {
      h += quantum_oscillator_poly(rational_from_double(cfg.mu), rational_from_double(cfg.omega));
      if (!g_r.is_zero()) h += word_poly({{Gen::PHat, 1}, {Gen::ATilde, 1}}, g_r);
      break;
    }
    case ScenarioKind::EnergyMeter: {
      const Rational mu_r = rational_from_double(cfg.mu);
      const Rational omega_r = rational_from_double(cfg.omega);
      h += quantum_oscillator_poly(mu_r, omega_r);
      if (!g_r.is_zero()) {
        h += word_poly({{Gen::PHat, 2}, {Gen::BTilde, 1}}, g_r / (Rational(2) * mu_r));
        const Rational kq = g_r * mu_r * omega_r * omega_r / Rational(2);
        if (!kq.is_zero()) h += word_poly({{Gen::QHat, 2}, {Gen::BTilde, 1}}, kq);
      }
      break;
    }
    case ScenarioKind::SpinMeter: {
      if (!g_r.is_zero()) h += word_poly({{Gen::S3, 1}, {Gen::ATilde, 1}}, g_r);
      const Rational eps_r = rational_from_double(cfg.epsilon_s3);
      if (!eps_r.is_zero()) h += word_poly({{Gen::S3, 1}}, eps_r);
      break;
    }
  }
  return h;
}

std::vector<Gen> scenario_generators(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FreeClassical:
      return {Gen::A, Gen::B, Gen::ATilde, Gen::BTilde};
    case ScenarioKind::MomentumMeter:
    case ScenarioKind::EnergyMeter:
      return {Gen::QHat, Gen::PHat, Gen::A, Gen::B, Gen::ATilde, Gen::BTilde};
    case ScenarioKind::SpinMeter:
      return {Gen::S1, Gen::S2, Gen::S3, Gen::A, Gen::B, Gen::ATilde, Gen::BTilde};
  }
  throw std::logic_error("bad scenario kind");
}

namespace {

struct ReadoutSpec {
  Gen pointer;
  OperatorPoly measured;   // empty (zero) when the scenario has no readout
};

ReadoutSpec readout_spec(const ScenarioConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::FreeClassical:
      return {Gen::B, OperatorPoly::zero()};
    case ScenarioKind::MomentumMeter:
      return {Gen::B, OperatorPoly::generator(Gen::PHat)};
    case ScenarioKind::EnergyMeter:
      return {Gen::A, quantum_oscillator_poly(rational_from_double(cfg.mu),
                                              rational_from_double(cfg.omega))};
    case ScenarioKind::SpinMeter:
      return {Gen::B, OperatorPoly::generator(Gen::S3)};
  }
  throw std::logic_error("bad scenario kind");
}

// engine-derived pointer-rate coefficient c and classical drift remainder:
// heisenberg_rhs(pointer, H) = c * measured + drift
struct PointerLaw {
  RationalComplex coefficient;
  OperatorPoly drift;
};

PointerLaw pointer_law(const OperatorPoly& pointer_rhs, const OperatorPoly& measured) {
  PointerLaw law;
  law.coefficient = RationalComplex();
  if (!measured.is_zero()) {
    const auto& [word, mc] = *measured.terms().begin();
    const RationalComplex rc = pointer_rhs.coeff_of(word);
    if (!rc.is_zero()) {
      // c = rc / mc, exact
      const Rational den = mc.re * mc.re + mc.im * mc.im;
      const RationalComplex inv{mc.re / den, (-mc.im) / den};
      law.coefficient = rc * inv;
    }
  }
  law.drift = pointer_rhs - measured.scaled(law.coefficient);
  for (auto& [w, c] : law.drift.terms())
    for (auto& [g, p] : w)
      if (is_quantum(g))
        throw std::runtime_error("pointer equation of motion is not (coefficient * measured "
                                 "observable + classical drift); readout protocol does not apply");
  return law;
}

struct Ols {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

Ols least_squares_rate(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  Ols out;
  out.slope = sty / stt;
  if (n > 2) {
    double ss = 0.0;
    const double intercept = ym - out.slope * tm;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (intercept + out.slope * t[i]);
      ss += r * r;
    }
    out.stderr_slope = std::sqrt(ss / static_cast<double>(n - 2) / stt);
  }
  return out;
}

}  // namespace

std::vector<Channel> scenario_channels(const ScenarioConfig& cfg,
                                       const std::shared_ptr<const Representation>& rep,
                                       const OperatorPoly& h,
                                       std::vector<std::pair<std::string, std::string>>* pairs) {
  std::vector<Channel> channels;
  const auto gens = scenario_generators(cfg.kind);
  for (Gen g : gens)
    channels.push_back({std::string(gen_name(g)), rep->assemble(OperatorPoly::generator(g))});
  for (Gen g : gens) {
    const std::string label = "rhs_" + std::string(gen_name(g));
    channels.push_back({label, rep->assemble(heisenberg_rhs(OperatorPoly::generator(g), h))});
    if (pairs) pairs->push_back({std::string(gen_name(g)), label});
  }

  if (cfg.kind == ScenarioKind::MomentumMeter || cfg.kind == ScenarioKind::EnergyMeter) {
    channels.push_back({"q2", rep->assemble(word_poly({{Gen::QHat, 2}}, Rational(1)))});
    channels.push_back({"Hq", rep->assemble(quantum_oscillator_poly(
                                  rational_from_double(cfg.mu), rational_from_double(cfg.omega)))});
  }
  if (cfg.kind == ScenarioKind::SpinMeter)
    channels.push_back({"bS3", rep->assemble(word_poly({{Gen::S3, 1}, {Gen::B, 1}}, Rational(1)))});

  // engine-derived free drift of the pointer (see Readout)
  const ReadoutSpec rs = readout_spec(cfg);
  const PointerLaw law =
      pointer_law(heisenberg_rhs(OperatorPoly::generator(rs.pointer), h), rs.measured);
  channels.push_back({"pointer_drift", rep->assemble(law.drift)});
  return channels;
}

EOMReport derive_eom_report(const ScenarioConfig& cfg) {
  EOMReport report;
  report.scenario = to_string(cfg.kind);
  const OperatorPoly h = scenario_hamiltonian(cfg);
  report.hamiltonian_text = h.str();
  report.hamiltonian_observable = h.is_observable();

  const Rational m_r = rational_from_double(cfg.m);
  const Rational g_r = rational_from_double(cfg.g);
  const Rational mu_r = rational_from_double(cfg.mu);
  const Rational omega_r = rational_from_double(cfg.omega);
  const Rational inv_m = Rational(1) / m_r;

  struct Claim {
    EomEntry::Claim kind = EomEntry::Claim::None;
    std::string text;
    OperatorPoly poly;
  };
  std::map<Gen, Claim> claims;
  switch (cfg.kind) {
    case ScenarioKind::FreeClassical:
      claims[Gen::A] = {EomEntry::Claim::Equals, "da/dt = 0", OperatorPoly::zero()};
      claims[Gen::B] = {EomEntry::Claim::Equals, "db/dt = a/m",
                        word_poly({{Gen::A, 1}}, inv_m)};
      claims[Gen::ATilde] = {EomEntry::Claim::Equals, "d(at)/dt = 0", OperatorPoly::zero()};
      claims[Gen::BTilde] = {EomEntry::Claim::Equals,
                             "d(bt)/dt = (a/m) * lift([b,a]_PB); the lift of a constant "
                             "vanishes, so the printed right-hand side reads as 0",
                             OperatorPoly::zero()};
      break;
    case ScenarioKind::MomentumMeter:
      claims[Gen::QHat] = {EomEntry::Claim::Equals, "dq/dt = p/mu + g*at",
                           word_poly({{Gen::PHat, 1}}, Rational(1) / mu_r) +
                               word_poly({{Gen::ATilde, 1}}, g_r)};
      claims[Gen::PHat] = {EomEntry::Claim::Equals, "dp/dt = mu*omega^2*q (printed without a sign)",
                           word_poly({{Gen::QHat, 1}}, mu_r * omega_r * omega_r)};
      claims[Gen::B] = {EomEntry::Claim::Equals, "db/dt = at/m + g*p",
                        word_poly({{Gen::ATilde, 1}}, inv_m) + word_poly({{Gen::PHat, 1}}, g_r)};
      claims[Gen::A] = {EomEntry::Claim::Equals, "da/dt = 0", OperatorPoly::zero()};
      break;
    case ScenarioKind::EnergyMeter:
      break;  // no printed lines for this setup
    case ScenarioKind::SpinMeter:
      claims[Gen::B] = {EomEntry::Claim::ContainsTerm, "db/dt contains g*S3",
                        word_poly({{Gen::S3, 1}}, g_r)};
      claims[Gen::S3] = {EomEntry::Claim::Observable,
                         "dS3/dt is free of unobservable quantities", OperatorPoly::zero()};
      break;
  }

  for (Gen gen : scenario_generators(cfg.kind)) {
    EomEntry entry;
    entry.variable = gen_name(gen);
    const OperatorPoly rhs = heisenberg_rhs(OperatorPoly::generator(gen), h);
    entry.engine_rhs = rhs.str();
    entry.observable = rhs.is_observable();

    auto it = claims.find(gen);
    if (it != claims.end()) {
      entry.claim = it->second.kind;
      entry.paper_text = it->second.text;
      entry.paper_rhs = it->second.poly.str();
      switch (entry.claim) {
        case EomEntry::Claim::Equals:
          entry.match = rhs == it->second.poly;
          break;
        case EomEntry::Claim::ContainsTerm: {
          const auto& [word, c] = *it->second.poly.terms().begin();
          entry.match = rhs.coeff_of(word) == c;
          break;
        }
        case EomEntry::Claim::Observable:
          entry.match = rhs.is_observable();
          entry.paper_rhs.clear();
          break;
        case EomEntry::Claim::None:
          break;
      }
    }
    report.all_match = report.all_match && entry.match;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  auto rep = Representation::create(cfg.basis());
  const OperatorPoly h = scenario_hamiltonian(cfg);

  std::vector<std::pair<std::string, std::string>> pairs;
  const std::vector<Channel> channels = scenario_channels(cfg, rep, h, &pairs);
  const HybridState state0 = gaussian_state(rep, cfg.initial);

  EvolveResult er = cfg.prop.method == PropagatorConfig::Method::Split
                        ? evolve_split(state0, build_split_parts(h, rep), cfg.prop, channels, rep)
                        : evolve_dense_series(state0, rep->assemble(h), cfg.prop, channels, rep);

  RunResult result{std::move(er.series), Readout{}, er.monitors, derive_eom_report(cfg),
                   EhrenfestReport{},    {},        std::move(er.final_state), {}};

  result.ehrenfest = ehrenfest_check(result.series, pairs);

  for (std::size_t c = 0; c < result.series.labels.size(); ++c)
    result.final_values[result.series.labels[c]] = result.series.values[c].back();

  // pointer readout: least-squares rate, engine-derived drift subtracted,
  // divided by the engine-derived coefficient
  const ReadoutSpec rs = readout_spec(cfg);
  const PointerLaw law =
      pointer_law(heisenberg_rhs(OperatorPoly::generator(rs.pointer), h), rs.measured);
  Readout& ro = result.readout;
  ro.pointer = gen_name(rs.pointer);
  ro.measured = rs.measured.str();

  const auto* pv = result.series.channel(ro.pointer);
  const auto* dv = result.series.channel("pointer_drift");
  const Ols ols = least_squares_rate(result.series.times, *pv);
  ro.fitted_rate = ols.slope;
  ro.rate_stderr = ols.stderr_slope;
  double drift = 0.0;
  for (double v : *dv) drift += v;
  ro.drift = drift / static_cast<double>(dv->size());
  const double span = result.series.times.back() - result.series.times.front();
  ro.shift_rate = (pv->back() - pv->front()) / span;

  const cplx c_engine = to_complex(law.coefficient);
  ro.coefficient = c_engine.real();
  if (!law.coefficient.is_zero() && !rs.measured.is_zero()) {
    ro.valid = true;
    ro.inferred = (ro.fitted_rate - ro.drift) / ro.coefficient;
    ro.uncertainty = ro.rate_stderr / std::abs(ro.coefficient);
    ro.shift_inferred = (ro.shift_rate - ro.drift) / ro.coefficient;
  }

  for (const auto& e : result.eom.entries)
    if (!e.match)
      result.notes.push_back("eom mismatch for " + e.variable + ": engine '" + e.engine_rhs +
                             "' vs printed '" + e.paper_text + "'");
  if (cfg.omega == 0.0 && cfg.kind != ScenarioKind::FreeClassical &&
      cfg.kind != ScenarioKind::SpinMeter)
    result.notes.push_back("omega = 0 calibration variant: quantum sector on a 1-D grid, "
                           "p conserved, pointer response exactly linear");
  return result;
}

DisturbanceReport disturbance_study(const ScenarioConfig& base, const std::vector<double>& gs) {
  if (base.kind != ScenarioKind::MomentumMeter)
    throw std::invalid_argument("disturbance study is defined for the momentum meter");
  if (gs.empty() || gs[0] != 0.0)
    throw std::invalid_argument("disturbance study needs g values starting at 0");

  DisturbanceReport report;
  report.g_values = gs;
  std::vector<double> q_ref;
  for (double g : gs) {
    ScenarioConfig cfg = base;
    cfg.g = g;
    RunResult rr = run_scenario(cfg);
    const auto* q = rr.series.channel("q");
    const auto* q2 = rr.series.channel("q2");
    report.var_q_final.push_back(q2->back() - q->back() * q->back());
    if (g == 0.0) {
      q_ref = *q;
    } else {
      for (std::size_t k = 0; k < q->size(); ++k)
        report.max_q_deviation = std::max(report.max_q_deviation, std::abs((*q)[k] - q_ref[k]));
    }
  }
  report.variance_monotone = true;
  for (std::size_t i = 0; i + 1 < report.var_q_final.size(); ++i)
    report.variance_monotone =
        report.variance_monotone && report.var_q_final[i] < report.var_q_final[i + 1];
  return report;
}

std::string algebra_engine_version() {
  // FNV-1a over the canonical structure-table dump and the generator order
  std::uint64_t hash = 14695981039346656037ull;
  auto mix = [&hash](std::string_view s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= 1099511628211ull;
    }
  };
  for (Gen x : all_generators()) {
    mix(gen_name(x));
    mix(";");
  }
  const auto& table = StructureTable::hybrid();
  for (Gen x : all_generators())
    for (Gen y : all_generators()) {
      mix(gen_name(x));
      mix(",");
      mix(gen_name(y));
      mix("=");
      mix(table.bracket(x, y).str());
      mix(";");
    }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string("kvn-algebra-1-") + buf;
}

}  // namespace kvn
