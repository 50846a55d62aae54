#include "kvn/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace kvn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct LineSet {
  std::size_t count;   // number of lines
  int length;          // elements per line
  std::size_t stride;  // element stride within a line
  // offset of line l computed by offset(l)
  std::size_t outer;   // see offset()
  std::size_t inner;
  std::size_t offset(std::size_t l) const {
    // lines are indexed as l = hi*inner + lo with hi stepping by outer
    return (l / inner) * outer + (l % inner);
  }
};

LineSet line_set(const Shape3& sh, Axis axis) {
  const std::size_t sa = static_cast<std::size_t>(sh.n_b) * sh.d_q;
  switch (axis) {
    case Axis::Q:
      // line l is the contiguous block starting at l * d_q
      return {static_cast<std::size_t>(sh.n_a) * sh.n_b, sh.d_q, 1,
              static_cast<std::size_t>(sh.d_q), 1};
    case Axis::B:
      // line (ia, iq): offset ia*sa + iq, stride d_q
      return {static_cast<std::size_t>(sh.n_a) * sh.d_q, sh.n_b,
              static_cast<std::size_t>(sh.d_q), sa, static_cast<std::size_t>(sh.d_q)};
    case Axis::A:
      // line (ib, iq): offset ib*d_q + iq, stride sa
      return {static_cast<std::size_t>(sh.n_b) * sh.d_q, sh.n_a, sa,
              static_cast<std::size_t>(sh.n_b) * sh.d_q,
              static_cast<std::size_t>(sh.n_b) * sh.d_q};
  }
  throw std::logic_error("bad axis");
}

inline void fft_strided_line(cplx* base, std::size_t stride, const FftPlan& plan, bool inverse,
                             cplx* scratch) {
  if (stride == 1) {
    fft_line(base, plan, inverse);
    return;
  }
  for (int i = 0; i < plan.n; ++i) scratch[i] = base[static_cast<std::size_t>(i) * stride];
  fft_line(scratch, plan, inverse);
  for (int i = 0; i < plan.n; ++i) base[static_cast<std::size_t>(i) * stride] = scratch[i];
}

}  // namespace

FftPlan::FftPlan(int length) : n(length) {
  if (!is_pow2(length)) throw std::invalid_argument("fft length must be a power of two");
  log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  twiddle.resize(n / 2);
  for (int k = 0; k < n / 2; ++k) {
    double ang = -2.0 * kPi * k / n;
    twiddle[k] = {std::cos(ang), std::sin(ang)};
  }
  bitrev.resize(n);
  for (int i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (int b = 0; b < log2n; ++b)
      if (i & (1 << b)) r |= 1u << (log2n - 1 - b);
    bitrev[i] = r;
  }
}

void fft_line(cplx* x, const FftPlan& plan, bool inverse) {
  const int n = plan.n;
  for (int i = 0; i < n; ++i) {
    std::uint32_t j = plan.bitrev[i];
    if (static_cast<std::uint32_t>(i) < j) std::swap(x[i], x[j]);
  }
  for (int s = 1; s <= plan.log2n; ++s) {
    const int m = 1 << s;
    const int half = m >> 1;
    const int step = n / m;
    for (int k0 = 0; k0 < n; k0 += m) {
      for (int j = 0; j < half; ++j) {
        cplx w = plan.twiddle[static_cast<std::size_t>(j) * step];
        if (inverse) w = std::conj(w);
        cplx u = x[k0 + j];
        cplx v = x[k0 + j + half] * w;
        x[k0 + j] = u + v;
        x[k0 + j + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) x[i] *= inv;
  }
}

namespace kernels {

void fft_axis(cplx* data, const Shape3& sh, Axis axis, const FftPlan& plan, bool inverse) {
  const LineSet ls = line_set(sh, axis);
  if (plan.n != ls.length) throw std::invalid_argument("fft plan length mismatch");
#pragma omp parallel
  {
    std::vector<cplx> scratch(ls.stride == 1 ? 0 : plan.n);
#pragma omp for schedule(static)
    for (long long l = 0; l < static_cast<long long>(ls.count); ++l)
      fft_strided_line(data + ls.offset(l), ls.stride, plan, inverse, scratch.data());
  }
}

void multiply_phase(cplx* data, const cplx* phase, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) data[i] *= phase[i];
}

void multiply_real(cplx* data, const double* diag, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) data[i] *= diag[i];
}

void multiply_real_ab(cplx* data, const double* diag_ab, const Shape3& sh) {
  const long long sites = static_cast<long long>(sh.n_a) * sh.n_b;
  const int dq = sh.d_q;
#pragma omp parallel for schedule(static)
  for (long long s = 0; s < sites; ++s) {
    const double d = diag_ab[s];
    cplx* p = data + s * dq;
    for (int q = 0; q < dq; ++q) p[q] *= d;
  }
}

void multiply_real_q(cplx* data, const double* diag_q, const Shape3& sh) {
  const long long sites = static_cast<long long>(sh.n_a) * sh.n_b;
  const int dq = sh.d_q;
#pragma omp parallel for schedule(static)
  for (long long s = 0; s < sites; ++s) {
    cplx* p = data + s * dq;
    for (int q = 0; q < dq; ++q) p[q] *= diag_q[q];
  }
}

void quantum_apply(cplx* data, const Shape3& sh, const cplx* m, bool conj_transpose) {
  const long long sites = static_cast<long long>(sh.n_a) * sh.n_b;
  const int d = sh.d_q;
#pragma omp parallel
  {
    std::vector<cplx> y(d);
#pragma omp for schedule(static)
    for (long long s = 0; s < sites; ++s) {
      cplx* x = data + s * d;
      for (int i = 0; i < d; ++i) {
        cplx acc = 0.0;
        if (conj_transpose) {
          for (int j = 0; j < d; ++j) acc += std::conj(m[static_cast<std::size_t>(j) * d + i]) * x[j];
        } else {
          for (int j = 0; j < d; ++j) acc += m[static_cast<std::size_t>(i) * d + j] * x[j];
        }
        y[i] = acc;
      }
      for (int i = 0; i < d; ++i) x[i] = y[i];
    }
  }
}

void accumulate_scaled(cplx* acc, const cplx* x, cplx alpha, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) acc[i] += alpha * x[i];
}

void scale(cplx* x, double s, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) x[i] *= s;
}

// Chunked reductions: partial sums over fixed 4096-element chunks are computed
// in parallel, then combined serially in chunk order, so the result does not
// depend on the thread count.
cplx dot(const cplx* x, const cplx* y, std::size_t n) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<cplx> partial(nchunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    cplx s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(x[i]) * y[i];
    partial[c] = s;
  }
  cplx total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) total += partial[c];
  return total;
}

double sum_sq(const cplx* x, std::size_t n) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::norm(x[i]);
    partial[c] = s;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) total += partial[c];
  return total;
}

StateSums masked_sums(const cplx* x, const std::uint8_t* code, std::size_t n) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<StateSums> partial(nchunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    StateSums s;
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = std::norm(x[i]);
      s.norm_sq += w;
      if (code[i] & 1) s.boundary_sq += w;
      if (code[i] & 2) s.qtail_sq += w;
    }
    partial[c] = s;
  }
  StateSums total;
  for (std::size_t c = 0; c < nchunks; ++c) {
    total.norm_sq += partial[c].norm_sq;
    total.boundary_sq += partial[c].boundary_sq;
    total.qtail_sq += partial[c].qtail_sq;
  }
  return total;
}

namespace ref {

void fft_axis(cplx* data, const Shape3& sh, Axis axis, const FftPlan& plan, bool inverse) {
  const LineSet ls = line_set(sh, axis);
  if (plan.n != ls.length) throw std::invalid_argument("fft plan length mismatch");
  std::vector<cplx> scratch(ls.stride == 1 ? 0 : plan.n);
  for (std::size_t l = 0; l < ls.count; ++l)
    fft_strided_line(data + ls.offset(l), ls.stride, plan, inverse, scratch.data());
}

void multiply_phase(cplx* data, const cplx* phase, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) data[i] *= phase[i];
}

void multiply_real(cplx* data, const double* diag, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) data[i] *= diag[i];
}

void multiply_real_ab(cplx* data, const double* diag_ab, const Shape3& sh) {
  const std::size_t sites = static_cast<std::size_t>(sh.n_a) * sh.n_b;
  for (std::size_t s = 0; s < sites; ++s) {
    const double d = diag_ab[s];
    cplx* p = data + s * sh.d_q;
    for (int q = 0; q < sh.d_q; ++q) p[q] *= d;
  }
}

void multiply_real_q(cplx* data, const double* diag_q, const Shape3& sh) {
  const std::size_t sites = static_cast<std::size_t>(sh.n_a) * sh.n_b;
  for (std::size_t s = 0; s < sites; ++s) {
    cplx* p = data + s * sh.d_q;
    for (int q = 0; q < sh.d_q; ++q) p[q] *= diag_q[q];
  }
}

void quantum_apply(cplx* data, const Shape3& sh, const cplx* m, bool conj_transpose) {
  const std::size_t sites = static_cast<std::size_t>(sh.n_a) * sh.n_b;
  const int d = sh.d_q;
  std::vector<cplx> y(d);
  for (std::size_t s = 0; s < sites; ++s) {
    cplx* x = data + s * d;
    for (int i = 0; i < d; ++i) {
      cplx acc = 0.0;
      if (conj_transpose) {
        for (int j = 0; j < d; ++j) acc += std::conj(m[static_cast<std::size_t>(j) * d + i]) * x[j];
      } else {
        for (int j = 0; j < d; ++j) acc += m[static_cast<std::size_t>(i) * d + j] * x[j];
      }
      y[i] = acc;
    }
    for (int i = 0; i < d; ++i) x[i] = y[i];
  }
}

void accumulate_scaled(cplx* acc, const cplx* x, cplx alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += alpha * x[i];
}

void scale(cplx* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

cplx dot(const cplx* x, const cplx* y, std::size_t n) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  cplx total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    cplx s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(x[i]) * y[i];
    total += s;
  }
  return total;
}

double sum_sq(const cplx* x, std::size_t n) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  double total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::norm(x[i]);
    total += s;
  }
  return total;
}

StateSums masked_sums(const cplx* x, const std::uint8_t* code, std::size_t n) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  StateSums total;
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    StateSums s;
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = std::norm(x[i]);
      s.norm_sq += w;
      if (code[i] & 1) s.boundary_sq += w;
      if (code[i] & 2) s.qtail_sq += w;
    }
    total.norm_sq += s.norm_sq;
    total.boundary_sq += s.boundary_sq;
    total.qtail_sq += s.qtail_sq;
  }
  return total;
}

}  // namespace ref

}  // namespace kernels

int apply_thread_cap() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("KVN_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  omp_set_num_threads(n);
  return n;
}

}  // namespace kvn
