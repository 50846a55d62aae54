#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace kvn {

using cplx = std::complex<double>;

// Logical shape of a hybrid amplitude array, row-major [ia][ib][iq].
struct Shape3 {
  int n_a = 1;
  int n_b = 1;
  int d_q = 1;
  std::size_t size() const {
    return static_cast<std::size_t>(n_a) * n_b * d_q;
  }
};

enum class Axis { A, B, Q };

// Precomputed radix-2 plan for one power-of-two length.
struct FftPlan {
  int n = 0;
  int log2n = 0;
  std::vector<cplx> twiddle;       // exp(-2*pi*i*k/n), k < n/2
  std::vector<std::uint32_t> bitrev;

  explicit FftPlan(int length);
  FftPlan() = default;
};

// Unnormalized forward / (1/n)-normalized inverse transform of one line.
// Shared by the parallel and the reference kernels so the two differ only in
// scheduling, never in arithmetic.
void fft_line(cplx* x, const FftPlan& plan, bool inverse);

struct StateSums {
  double norm_sq = 0.0;
  double boundary_sq = 0.0;  // cells flagged with bit 0 of the site code
  double qtail_sq = 0.0;     // cells flagged with bit 1
};

// Grid kernels. The parallel versions in kvn::kernels are bitwise
// reproducible for any thread count: every output element is written by
// exactly one iteration, and reductions accumulate fixed-size chunks in index
// order. kvn::kernels::ref holds plain serial loops over the same arithmetic;
// the test suite asserts exact agreement and tools/bench_kernels compares
// their throughput.
namespace kernels {

inline constexpr std::size_t kReduceChunk = 4096;

void fft_axis(cplx* data, const Shape3& sh, Axis axis, const FftPlan& plan, bool inverse);
void multiply_phase(cplx* data, const cplx* phase, std::size_t n);
void multiply_real(cplx* data, const double* diag, std::size_t n);
// data[(ia,ib,iq)] *= diag_ab[ia*n_b+ib]
void multiply_real_ab(cplx* data, const double* diag_ab, const Shape3& sh);
// data[(ia,ib,iq)] *= diag_q[iq]
void multiply_real_q(cplx* data, const double* diag_q, const Shape3& sh);
// per-site quantum matrix action; m is d_q x d_q row-major, y = m x or m^H x
void quantum_apply(cplx* data, const Shape3& sh, const cplx* m, bool conj_transpose);
void accumulate_scaled(cplx* acc, const cplx* x, cplx alpha, std::size_t n);
void scale(cplx* x, double s, std::size_t n);

// <x|y> with x conjugated; deterministic chunked reduction
cplx dot(const cplx* x, const cplx* y, std::size_t n);
double sum_sq(const cplx* x, std::size_t n);
StateSums masked_sums(const cplx* x, const std::uint8_t* code, std::size_t n);

namespace ref {
void fft_axis(cplx* data, const Shape3& sh, Axis axis, const FftPlan& plan, bool inverse);
void multiply_phase(cplx* data, const cplx* phase, std::size_t n);
void multiply_real(cplx* data, const double* diag, std::size_t n);
void multiply_real_ab(cplx* data, const double* diag_ab, const Shape3& sh);
void multiply_real_q(cplx* data, const double* diag_q, const Shape3& sh);
void quantum_apply(cplx* data, const Shape3& sh, const cplx* m, bool conj_transpose);
void accumulate_scaled(cplx* acc, const cplx* x, cplx alpha, std::size_t n);
void scale(cplx* x, double s, std::size_t n);
cplx dot(const cplx* x, const cplx* y, std::size_t n);
double sum_sq(const cplx* x, std::size_t n);
StateSums masked_sums(const cplx* x, const std::uint8_t* code, std::size_t n);
}  // namespace ref

}  // namespace kernels

// Honors the KVN_THREADS env var (caps the OpenMP team size); returns the
// effective thread count.
int apply_thread_cap();

}  // namespace kvn
