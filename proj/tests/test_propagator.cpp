#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kvn/poly_text.hpp"
#include "kvn/propagator.hpp"
#include "kvn/scenarios.hpp"

using namespace kvn;

namespace {

double state_dist(const HybridState& x, const HybridState& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x.amp()[i] - y.amp()[i]);
  return std::sqrt(s * x.basis().measure());
}

ScenarioConfig small_momentum() {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::MomentumMeter;
  cfg.m = 1.0;
  cfg.g = 0.2;
  cfg.mu = 1.0;
  cfg.omega = 1.0;
  cfg.n_levels = 8;
  cfg.grid = GridSpec{8, 16, 4.0, 5.0};
  cfg.initial.a0 = 0.0;
  cfg.initial.b0 = 0.0;
  cfg.initial.sigma_a = 0.45;  // right-edge cell sits at L - da = 3
  cfg.initial.sigma_b = 0.6;
  cfg.initial.q0 = 0.4;
  cfg.initial.p0 = 0.2;
  cfg.prop.dt = 1e-3;
  cfg.prop.n_steps = 1000;
  cfg.prop.record_every = 10;
  return cfg;
}

}  // namespace

TEST_CASE("split parts: roles and exponentiability validation") {
  ScenarioConfig cfg = small_momentum();
  auto rep = Representation::create(cfg.basis());

  SUBCASE("momentum meter splits into quantum + classical + coupling") {
    const auto parts = build_split_parts(scenario_hamiltonian(cfg), rep);
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].role == "quantum");
    CHECK(parts[1].role == "classical");
    CHECK(parts[2].role == "coupling");
    CHECK(parts[1].fft_b);       // a at / m advects b
    CHECK_FALSE(parts[1].fft_a);
    CHECK(parts[2].fft_b);       // g p at is diagonal in (p-frame, k_b)
    CHECK_FALSE(parts[2].qrot.empty());
  }
  SUBCASE("g = 0 drops the coupling part") {
    cfg.g = 0.0;
    const auto parts = build_split_parts(scenario_hamiltonian(cfg), rep);
    CHECK(parts.size() == 2);
  }
  SUBCASE("a classical word mixing b with at is rejected") {
    const OperatorPoly bad = parse_poly("(1, 0)*b*at");
    CHECK_THROWS_AS(build_split_parts(bad, rep), DimensionError);
  }
  SUBCASE("a coupling with no common factor is rejected") {
    const OperatorPoly bad = parse_poly("(1, 0)*p*at + (1, 0)*q*bt");
    CHECK_THROWS_AS(build_split_parts(bad, rep), DimensionError);
  }
  SUBCASE("energy-meter coupling shares its classical word and is accepted") {
    ScenarioConfig en = small_momentum();
    en.kind = ScenarioKind::EnergyMeter;
    const auto parts = build_split_parts(scenario_hamiltonian(en), rep);
    REQUIRE(parts.size() == 3);
    CHECK(parts[2].fft_a);  // bt is diagonal after the a-axis transform
  }
}

TEST_CASE("split propagation matches the dense oracle at O(dt^2)") {
  ScenarioConfig cfg = small_momentum();
  auto rep = Representation::create(cfg.basis());
  const OperatorPoly h = scenario_hamiltonian(cfg);
  const HybridState psi0 = gaussian_state(rep, cfg.initial);
  const auto parts = build_split_parts(h, rep);
  const MatrixOperator hop = rep->assemble(h);

  const double T = 0.5;
  const HybridState dense = evolve_dense(psi0, hop, T);

  std::vector<double> errs;
  for (const double dt : {0.02, 0.01, 0.005}) {
    PropagatorConfig pc;
    pc.dt = dt;
    pc.n_steps = std::llround(T / dt);
    pc.record_every = pc.n_steps;
    const EvolveResult er = evolve_split(psi0, parts, pc, {}, rep);
    errs.push_back(state_dist(er.final_state, dense));
  }
  CAPTURE(errs[0]);
  CAPTURE(errs[1]);
  CAPTURE(errs[2]);
  CHECK(errs[0] / errs[1] >= 3.7);  // second order: halving dt quarters the error
  CHECK(errs[1] / errs[2] >= 3.7);
  CHECK(errs[2] < 1e-5);
}

TEST_CASE("unitarity: norm drift below 1e-9 over 1e4 steps") {
  ScenarioConfig cfg = small_momentum();
  cfg.n_levels = 12;  // the coupling pumps the coherent amplitude over long runs
  cfg.prop.dt = 5e-5; // 1e4 steps; T kept short so the advected tails stay interior
  cfg.prop.n_steps = 10000;
  cfg.prop.record_every = 2000;
  auto rep = Representation::create(cfg.basis());
  const auto parts = build_split_parts(scenario_hamiltonian(cfg), rep);
  const EvolveResult er = evolve_split(gaussian_state(rep, cfg.initial), parts, cfg.prop, {}, rep);
  CHECK(er.monitors.max_norm_dev < 1e-9);
}

TEST_CASE("free oscillator <q(t)> follows the closed form") {
  ScenarioConfig cfg = small_momentum();
  cfg.g = 0.0;
  cfg.n_levels = 12;
  // the classical advection needs k_b well resolved or its spectral ghosts
  // reach the boundary cells; 32 points over L_b = 6 keeps the tail at 1e-45
  cfg.grid = GridSpec{8, 32, 4.0, 6.0};
  cfg.initial.sigma_b = 0.8;
  cfg.omega = 1.3;
  cfg.mu = 0.8;
  cfg.initial.q0 = 0.5;
  cfg.initial.p0 = -0.3;
  cfg.prop.record_every = 20;
  RunResult rr = run_scenario(cfg);
  const auto* q = rr.series.channel("q");
  REQUIRE(q);
  double worst = 0.0;
  for (std::size_t k = 0; k < q->size(); ++k) {
    const double t = rr.series.times[k];
    const double expect = cfg.initial.q0 * std::cos(cfg.omega * t) +
                          cfg.initial.p0 / (cfg.mu * cfg.omega) * std::sin(cfg.omega * t);
    worst = std::max(worst, std::abs((*q)[k] - expect));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("time series bookkeeping") {
  ScenarioConfig cfg = small_momentum();
  cfg.prop.n_steps = 100;
  cfg.prop.record_every = 7;
  RunResult rr = run_scenario(cfg);
  const TimeSeries& ts = rr.series;
  REQUIRE(ts.n_samples() == 1 + 100 / 7);
  for (std::size_t k = 1; k < ts.times.size(); ++k) CHECK(ts.times[k] > ts.times[k - 1]);
  for (const auto& col : ts.values) CHECK(col.size() == ts.n_samples());
  CHECK(ts.channel("q") != nullptr);
  CHECK(ts.channel("rhs_q") != nullptr);
  CHECK(ts.channel("norm") != nullptr);
  CHECK(ts.channel("nope") == nullptr);
}

TEST_CASE("ehrenfest closure holds on a finely sampled run") {
  ScenarioConfig cfg = small_momentum();
  // the bt channel needs the k_a spectrum resolved, unlike the dynamics
  cfg.grid = GridSpec{16, 16, 4.0, 5.0};
  cfg.initial.sigma_a = 0.5;
  cfg.prop.dt = 1e-3;
  cfg.prop.n_steps = 300;
  cfg.prop.record_every = 1;
  RunResult rr = run_scenario(cfg);
  for (const auto& e : rr.ehrenfest.entries) {
    CAPTURE(e.x_label);
    CAPTURE(e.max_dev);
    CHECK(e.pass);
  }
  CHECK(rr.ehrenfest.all_pass);
}

TEST_CASE("ehrenfest check demands its channels") {
  TimeSeries ts;
  ts.times = {0.0, 0.1, 0.2};
  ts.add_channel("x");
  ts.values[0] = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(ehrenfest_check(ts, {{"x", "rhs_x"}}), std::invalid_argument);
}

TEST_CASE("propagator config validation") {
  PropagatorConfig pc;
  pc.dt = 0.0;
  CHECK_THROWS_AS(pc.validate(), std::invalid_argument);
  pc.dt = 1e-3;
  pc.n_steps = 0;
  CHECK_THROWS_AS(pc.validate(), std::invalid_argument);
  pc.n_steps = 10;
  pc.record_every = 0;
  CHECK_THROWS_AS(pc.validate(), std::invalid_argument);
}

TEST_CASE("leakage monitor trips when the packet reaches the boundary") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::FreeClassical;
  cfg.grid = GridSpec{32, 32, 8.0, 8.0};
  cfg.initial.a0 = 2.0;   // b drifts at rate 2, support hits +8 quickly
  cfg.initial.b0 = 4.0;
  cfg.initial.sigma_a = 0.5;
  cfg.initial.sigma_b = 0.5;
  cfg.prop.dt = 1e-2;
  cfg.prop.n_steps = 300;
  CHECK_THROWS_AS(run_scenario(cfg), MonitorError);
  try {
    run_scenario(cfg);
  } catch (const MonitorError& e) {
    CHECK(e.reason == "leakage");
    CHECK(e.step > 0);
  }
}

TEST_CASE("truncation monitor trips when the fock tail fills") {
  ScenarioConfig cfg = small_momentum();
  cfg.n_levels = 4;        // coherent state with |alpha|^2 = 0.1 spills past d = 4
  cfg.initial.q0 = 0.4;
  cfg.initial.p0 = 0.2;
  cfg.prop.n_steps = 10;
  try {
    run_scenario(cfg);
    FAIL("expected a truncation trip");
  } catch (const MonitorError& e) {
    CHECK(e.reason == "truncation");
  }
}

TEST_CASE("dense-series evolution records the same channels as split") {
  // spin meter at dim 1024: the two split parts commute, so the split path is
  // exact and the methods must agree to eigensolver precision
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::SpinMeter;
  cfg.g = 0.4;
  cfg.grid = GridSpec{16, 32, 5.0, 6.0};
  cfg.initial.sigma_a = 0.55;
  cfg.initial.sigma_b = 0.6;
  cfg.initial.spin_theta = 1.2;
  cfg.prop.dt = 1e-2;
  cfg.prop.n_steps = 50;
  cfg.prop.record_every = 5;
  cfg.prop.method = PropagatorConfig::Method::Dense;
  RunResult dense = run_scenario(cfg);
  cfg.prop.method = PropagatorConfig::Method::Split;
  RunResult split = run_scenario(cfg);
  REQUIRE(dense.series.labels == split.series.labels);
  REQUIRE(dense.series.n_samples() == split.series.n_samples());
  for (const char* ch : {"b", "S3", "bS3", "at"}) {
    const auto* xd = dense.series.channel(ch);
    const auto* xs = split.series.channel(ch);
    double worst = 0.0;
    for (std::size_t k = 0; k < xd->size(); ++k)
      worst = std::max(worst, std::abs((*xd)[k] - (*xs)[k]));
    CAPTURE(ch);
    CHECK(worst < 1e-8);
  }
}
