// Timing comparison of the OpenMP grid kernels against the serial reference,
// plus one full split-operator step at production size.

#include <omp.h>

#include <cstdio>
#include <random>

#include "kvn/propagator.hpp"
#include "kvn/scenarios.hpp"

using kvn::cplx;

namespace {

std::vector<cplx> random_state(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> x(n);
  for (auto& v : x) v = cplx(gauss(rng), gauss(rng));
  return x;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    f();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-24s %10.3f ms %10.3f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel);
}

}  // namespace

int main() {
  const int threads = kvn::apply_thread_cap();
  const kvn::Shape3 sh{64, 64, 64};
  const std::size_t n = sh.size();
  std::printf("grid %d x %d x %d (%zu amplitudes), %d threads\n", sh.n_a, sh.n_b, sh.d_q, n,
              threads);
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  const kvn::FftPlan plan_a(sh.n_a), plan_b(sh.n_b), plan_q(sh.d_q);
  auto base = random_state(n, 42);

  {
    auto x = base;
    const double ts = time_best_of(3, [&] {
      kvn::kernels::ref::fft_axis(x.data(), sh, kvn::Axis::B, plan_b, false);
      kvn::kernels::ref::fft_axis(x.data(), sh, kvn::Axis::B, plan_b, true);
    });
    auto y = base;
    const double tp = time_best_of(3, [&] {
      kvn::kernels::fft_axis(y.data(), sh, kvn::Axis::B, plan_b, false);
      kvn::kernels::fft_axis(y.data(), sh, kvn::Axis::B, plan_b, true);
    });
    report("fft_axis_b (fwd+inv)", ts, tp);
  }
  {
    auto x = base;
    const double ts = time_best_of(3, [&] {
      kvn::kernels::ref::fft_axis(x.data(), sh, kvn::Axis::Q, plan_q, false);
      kvn::kernels::ref::fft_axis(x.data(), sh, kvn::Axis::Q, plan_q, true);
    });
    auto y = base;
    const double tp = time_best_of(3, [&] {
      kvn::kernels::fft_axis(y.data(), sh, kvn::Axis::Q, plan_q, false);
      kvn::kernels::fft_axis(y.data(), sh, kvn::Axis::Q, plan_q, true);
    });
    report("fft_axis_q (fwd+inv)", ts, tp);
  }
  {
    auto phase = random_state(n, 7);
    auto x = base;
    const double ts =
        time_best_of(5, [&] { kvn::kernels::ref::multiply_phase(x.data(), phase.data(), n); });
    auto y = base;
    const double tp =
        time_best_of(5, [&] { kvn::kernels::multiply_phase(y.data(), phase.data(), n); });
    report("multiply_phase", ts, tp);
  }
  {
    const int d = sh.d_q;
    auto m = random_state(static_cast<std::size_t>(d) * d, 11);
    auto x = base;
    const double ts =
        time_best_of(3, [&] { kvn::kernels::ref::quantum_apply(x.data(), sh, m.data(), false); });
    auto y = base;
    const double tp =
        time_best_of(3, [&] { kvn::kernels::quantum_apply(y.data(), sh, m.data(), false); });
    report("quantum_apply (d=64)", ts, tp);
  }
  {
    volatile double sink = 0.0;
    const double ts =
        time_best_of(5, [&] { sink = kvn::kernels::ref::sum_sq(base.data(), n); });
    const double tp = time_best_of(5, [&] { sink = kvn::kernels::sum_sq(base.data(), n); });
    (void)sink;
    report("sum_sq reduction", ts, tp);
  }

  // one full momentum-meter step at production size (parallel path only)
  kvn::ScenarioConfig cfg;
  cfg.kind = kvn::ScenarioKind::MomentumMeter;
  cfg.omega = 0.0;
  cfg.n_levels = 64;
  cfg.L_q = 8.0;
  cfg.g = 0.2;
  cfg.initial.sigma_a = 0.5;
  cfg.initial.sigma_b = 0.5;
  cfg.initial.p0 = 1.5;
  cfg.initial.sigma_q = 0.6;
  cfg.prop.n_steps = 100;
  cfg.prop.record_every = 100;
  auto rep = kvn::Representation::create(cfg.basis());
  const auto parts = kvn::build_split_parts(kvn::scenario_hamiltonian(cfg), rep);
  kvn::HybridState psi = kvn::gaussian_state(rep, cfg.initial);
  const double t0 = omp_get_wtime();
  kvn::EvolveResult er = kvn::evolve_split(psi, parts, cfg.prop, {}, rep);
  const double dt = omp_get_wtime() - t0;
  std::printf("\nsplit step, 64x64x64 momentum meter: %.3f ms/step (%ld steps, norm dev %.1e)\n",
              dt / cfg.prop.n_steps * 1e3, cfg.prop.n_steps, er.monitors.max_norm_dev);
  return 0;
}
