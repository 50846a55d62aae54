#pragma once

#include <vector>

#include "kvn/kernels.hpp"

namespace kvn {

// Hermitian eigendecomposition A = V diag(eigval) V^H of a column-major
// matrix. Backed by LAPACK zheevd, pinned to one BLAS thread so results are
// reproducible run to run.
struct HermitianEig {
  int n = 0;
  std::vector<double> eigval;
  std::vector<cplx> vectors;  // column-major unitary V
};

// Throws std::runtime_error if the matrix fails the Hermiticity check or the
// factorization does not converge.
HermitianEig eigh(std::vector<cplx> colmajor, int n, double hermiticity_tol = 1e-9);

// y = V exp(-i t diag(eigval)) V^H x   (exact propagator of the materialized H)
void dense_evolve(const HermitianEig& eig, double t, const cplx* x, cplx* y);

}  // namespace kvn
