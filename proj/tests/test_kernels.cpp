#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "kvn/kernels.hpp"

using namespace kvn;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::vector<cplx> make_random(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> x(n);
  for (auto& v : x) v = cplx(gauss(rng), gauss(rng));
  return x;
}

// O(n^2) reference transform, the independent oracle for the radix-2 kernel
std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n, cplx(0.0, 0.0));
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * kPi * static_cast<double>(k * j % n) / n;
      out[k] += x[j] * cplx(std::cos(ang), std::sin(ang));
    }
  if (inverse)
    for (auto& v : out) v *= 1.0 / static_cast<double>(n);
  return out;
}

double max_abs_diff(const std::vector<cplx>& x, const std::vector<cplx>& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

bool bitwise_equal(const std::vector<cplx>& x, const std::vector<cplx>& y) {
  return x.size() == y.size() &&
         std::memcmp(x.data(), y.data(), x.size() * sizeof(cplx)) == 0;
}

}  // namespace

TEST_CASE("fft matches the naive DFT oracle") {
  for (int n : {8, 16, 64, 256}) {
    const FftPlan plan(n);
    auto x = make_random(n, 1000 + n);
    auto expect = naive_dft(x, false);
    auto got = x;
    fft_line(got.data(), plan, false);
    CHECK(max_abs_diff(got, expect) < 1e-11 * n);

    auto back = got;
    fft_line(back.data(), plan, true);
    CHECK(max_abs_diff(back, x) < 1e-12 * n);
  }
}

TEST_CASE("fft of a plane wave is a delta") {
  const int n = 32;
  const FftPlan plan(n);
  const int mode = 5;
  std::vector<cplx> x(n);
  for (int j = 0; j < n; ++j) {
    const double ang = 2.0 * kPi * mode * j / n;
    x[j] = cplx(std::cos(ang), std::sin(ang));
  }
  fft_line(x.data(), plan, false);
  for (int k = 0; k < n; ++k) {
    const double expect = k == mode ? n : 0.0;
    CHECK(std::abs(x[k] - expect) < 1e-12 * n);
  }
}

TEST_CASE("fft plan rejects non-power-of-two lengths") {
  CHECK_THROWS_AS(FftPlan(24), std::invalid_argument);
  CHECK_THROWS_AS(FftPlan(0), std::invalid_argument);
}

TEST_CASE("axis transforms act line by line") {
  const Shape3 sh{4, 8, 2};
  const FftPlan plan_b(sh.n_b);
  auto data = make_random(sh.size(), 99);

  // transform along b via the kernel
  auto got = data;
  kernels::fft_axis(got.data(), sh, Axis::B, plan_b, false);

  // gather each (ia, iq) line, transform, compare
  for (int ia = 0; ia < sh.n_a; ++ia)
    for (int iq = 0; iq < sh.d_q; ++iq) {
      std::vector<cplx> line(sh.n_b);
      for (int ib = 0; ib < sh.n_b; ++ib)
        line[ib] = data[(static_cast<std::size_t>(ia) * sh.n_b + ib) * sh.d_q + iq];
      fft_line(line.data(), plan_b, false);
      for (int ib = 0; ib < sh.n_b; ++ib) {
        const cplx v = got[(static_cast<std::size_t>(ia) * sh.n_b + ib) * sh.d_q + iq];
        CHECK(std::abs(v - line[ib]) == 0.0);
      }
    }
}

TEST_CASE("parallel kernels agree bitwise with the serial reference") {
  const Shape3 sh{16, 32, 8};
  const std::size_t n = sh.size();
  const auto base = make_random(n, 31415);
  const FftPlan plan_a(sh.n_a), plan_b(sh.n_b), plan_q(sh.d_q);

  for (auto axis : {Axis::A, Axis::B, Axis::Q}) {
    const FftPlan& plan = axis == Axis::A ? plan_a : axis == Axis::B ? plan_b : plan_q;
    auto x = base;
    auto y = base;
    kernels::fft_axis(x.data(), sh, axis, plan, false);
    kernels::ref::fft_axis(y.data(), sh, axis, plan, false);
    CHECK(bitwise_equal(x, y));
    kernels::fft_axis(x.data(), sh, axis, plan, true);
    kernels::ref::fft_axis(y.data(), sh, axis, plan, true);
    CHECK(bitwise_equal(x, y));
  }

  const auto phase = make_random(n, 7);
  {
    auto x = base;
    auto y = base;
    kernels::multiply_phase(x.data(), phase.data(), n);
    kernels::ref::multiply_phase(y.data(), phase.data(), n);
    CHECK(bitwise_equal(x, y));
  }
  {
    std::vector<double> diag(static_cast<std::size_t>(sh.n_a) * sh.n_b);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : diag) v = gauss(rng);
    auto x = base;
    auto y = base;
    kernels::multiply_real_ab(x.data(), diag.data(), sh);
    kernels::ref::multiply_real_ab(y.data(), diag.data(), sh);
    CHECK(bitwise_equal(x, y));
  }
  {
    std::vector<double> diag_q(sh.d_q);
    for (int i = 0; i < sh.d_q; ++i) diag_q[i] = 0.25 * i - 1.0;
    auto x = base;
    auto y = base;
    kernels::multiply_real_q(x.data(), diag_q.data(), sh);
    kernels::ref::multiply_real_q(y.data(), diag_q.data(), sh);
    CHECK(bitwise_equal(x, y));
  }
  {
    const auto m = make_random(static_cast<std::size_t>(sh.d_q) * sh.d_q, 17);
    for (bool dagger : {false, true}) {
      auto x = base;
      auto y = base;
      kernels::quantum_apply(x.data(), sh, m.data(), dagger);
      kernels::ref::quantum_apply(y.data(), sh, m.data(), dagger);
      CHECK(bitwise_equal(x, y));
    }
  }
  {
    auto x = base;
    auto y = base;
    kernels::accumulate_scaled(x.data(), phase.data(), cplx(0.3, -0.4), n);
    kernels::ref::accumulate_scaled(y.data(), phase.data(), cplx(0.3, -0.4), n);
    CHECK(bitwise_equal(x, y));
  }
  {
    const cplx dx = kernels::dot(base.data(), phase.data(), n);
    const cplx dy = kernels::ref::dot(base.data(), phase.data(), n);
    CHECK(dx == dy);
    CHECK(kernels::sum_sq(base.data(), n) == kernels::ref::sum_sq(base.data(), n));
  }
  {
    std::vector<std::uint8_t> code(n, 0);
    for (std::size_t i = 0; i < n; i += 3) code[i] |= 1;
    for (std::size_t i = 0; i < n; i += 5) code[i] |= 2;
    const StateSums sx = kernels::masked_sums(base.data(), code.data(), n);
    const StateSums sy = kernels::ref::masked_sums(base.data(), code.data(), n);
    CHECK(sx.norm_sq == sy.norm_sq);
    CHECK(sx.boundary_sq == sy.boundary_sq);
    CHECK(sx.qtail_sq == sy.qtail_sq);
  }
}

TEST_CASE("chunked reductions are independent of the thread count") {
  // the chunk boundaries are fixed, so any scheduling gives the same bits;
  // compare a large odd-sized reduction against the serial reference
  const std::size_t n = 3 * kernels::kReduceChunk + 1234;
  const auto x = make_random(n, 271828);
  const auto y = make_random(n, 161803);
  CHECK(kernels::dot(x.data(), y.data(), n) == kernels::ref::dot(x.data(), y.data(), n));
}

TEST_CASE("parseval holds through the forward transform") {
  const int n = 64;
  const FftPlan plan(n);
  auto x = make_random(n, 555);
  const double before = kernels::sum_sq(x.data(), n);
  fft_line(x.data(), plan, false);
  const double after = kernels::sum_sq(x.data(), n) / n;
  CHECK(std::abs(before - after) < 1e-12 * n);
}
