#include "kvn/dense.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <string>

extern "C" void openblas_set_num_threads(int);

namespace kvn {

HermitianEig eigh(std::vector<cplx> colmajor, int n, double hermiticity_tol) {
  if (n <= 0 || colmajor.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("eigh: bad matrix dimensions");

  double max_abs = 0.0, max_dev = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const cplx u = colmajor[static_cast<std::size_t>(j) * n + i];
      const cplx l = colmajor[static_cast<std::size_t>(i) * n + j];
      max_abs = std::max(max_abs, std::abs(u));
      max_dev = std::max(max_dev, std::abs(u - std::conj(l)));
    }
  if (max_dev > hermiticity_tol * std::max(1.0, max_abs))
    throw std::runtime_error("eigh: matrix is not Hermitian (max deviation " +
                             std::to_string(max_dev) + ")");

  openblas_set_num_threads(1);  // reproducibility over raw speed

  HermitianEig out;
  out.n = n;
  out.eigval.resize(n);
  out.vectors = std::move(colmajor);
  const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                                  out.eigval.data());
  if (info != 0)
    throw std::runtime_error("eigh: zheevd failed with info = " + std::to_string(info));
  return out;
}

void dense_evolve(const HermitianEig& eig, double t, const cplx* x, cplx* y) {
  const int n = eig.n;
  const cplx* V = eig.vectors.data();
  std::vector<cplx> z(n);

  // z = V^H x, one output element per iteration (deterministic)
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    const cplx* col = V + static_cast<std::size_t>(k) * n;
    cplx s = 0.0;
    for (int i = 0; i < n; ++i) s += std::conj(col[i]) * x[i];
    z[k] = s;
  }
  for (int k = 0; k < n; ++k) {
    const double ang = -eig.eigval[k] * t;
    z[k] *= cplx(std::cos(ang), std::sin(ang));
  }
  // y = V z
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) s += V[static_cast<std::size_t>(k) * n + i] * z[k];
    y[i] = s;
  }
}

}  // namespace kvn
