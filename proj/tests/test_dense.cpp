#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kvn/dense.hpp"
#include "kvn/poly_text.hpp"
#include "kvn/propagator.hpp"

using namespace kvn;

namespace {

double state_dist(const HybridState& x, const HybridState& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x.amp()[i] - y.amp()[i]);
  return std::sqrt(s * x.basis().measure());
}

std::vector<cplx> random_hermitian(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> m(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    m[static_cast<std::size_t>(j) * n + j] = gauss(rng);
    for (int i = 0; i < j; ++i) {
      const cplx v(gauss(rng), gauss(rng));
      m[static_cast<std::size_t>(j) * n + i] = v;
      m[static_cast<std::size_t>(i) * n + j] = std::conj(v);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("eigh factorizes a random Hermitian matrix") {
  const int n = 24;
  const auto a = random_hermitian(n, 5);
  const HermitianEig eig = eigh(a, n);

  // A V = V diag(w)
  double worst = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      cplx av = 0.0;
      for (int j = 0; j < n; ++j)
        av += a[static_cast<std::size_t>(j) * n + i] * eig.vectors[static_cast<std::size_t>(k) * n + j];
      worst = std::max(worst, std::abs(av - eig.eigval[k] * eig.vectors[static_cast<std::size_t>(k) * n + i]));
    }
  CHECK(worst < 1e-12);
  for (int k = 1; k < n; ++k) CHECK(eig.eigval[k - 1] <= eig.eigval[k]);
}

TEST_CASE("eigh rejects a non-Hermitian matrix") {
  auto a = random_hermitian(8, 6);
  a[3] += cplx(0.1, 0.0);  // break symmetry
  CHECK_THROWS_AS(eigh(a, 8), std::runtime_error);
}

TEST_CASE("dense evolution of a spin under omega S3 matches the closed form") {
  const Basis basis{GridSpec{8, 8, 4.0, 4.0}, QuantumSpec::spin()};
  auto rep = Representation::create(basis);
  const double omega = 0.9;
  // H = omega S3 as a dense operator on the full hybrid space
  const MatrixOperator h =
      rep->assemble(OperatorPoly::generator(Gen::S3).scaled(RationalComplex(Rational(9, 10))));

  GaussianParams p;
  p.sigma_a = 0.5;
  p.sigma_b = 0.5;
  p.spin_theta = 1.1;
  p.spin_phi = 0.3;
  const HybridState psi0 = gaussian_state(rep, p);

  const double t = 2.7;
  const HybridState psit = evolve_dense(psi0, h, t);

  // exp(-i omega t S3) rotates the relative phase of the spin components
  HybridState expect = psi0;
  const Shape3 sh = basis.shape();
  const cplx up = std::exp(cplx(0.0, -0.5 * omega * t));
  const cplx dn = std::exp(cplx(0.0, 0.5 * omega * t));
  for (std::size_t s = 0; s < sh.size(); s += 2) {
    expect.amp()[s] *= up;
    expect.amp()[s + 1] *= dn;
  }
  CHECK(state_dist(psit, expect) < 1e-12);
}

TEST_CASE("dense evolution: t = 0 is the identity and the norm is preserved") {
  const Basis basis{GridSpec{8, 8, 4.0, 4.0}, QuantumSpec::none()};
  auto rep = Representation::create(basis);
  const MatrixOperator h = rep->assemble(parse_poly("(1, 0)*a*at"));
  GaussianParams p;
  p.sigma_a = 0.4;
  p.sigma_b = 0.4;
  const HybridState psi0 = gaussian_state(rep, p);

  CHECK(state_dist(evolve_dense(psi0, h, 0.0), psi0) < 1e-13);
  const HybridState psit = evolve_dense(psi0, h, 3.0);
  CHECK(std::abs(psit.norm() - 1.0) < 1e-10);
}

TEST_CASE("dense free classical transport reproduces b(t) = b0 + (a0/m) t") {
  const Basis basis{GridSpec{16, 16, 8.0, 8.0}, QuantumSpec::none()};
  auto rep = Representation::create(basis);
  const MatrixOperator h = rep->assemble(parse_poly("(1/2, 0)*a*at"));  // m = 2

  GaussianParams p;
  p.a0 = 1.0;
  p.b0 = -2.0;
  p.sigma_a = 0.8;
  p.sigma_b = 0.9;
  const HybridState psi0 = gaussian_state(rep, p);

  const double t = 2.0;
  const HybridState psit = evolve_dense(psi0, h, t);
  const double b_mean = expectation_real(psit, rep->assemble(OperatorPoly::generator(Gen::B)));
  CHECK(b_mean == doctest::Approx(-2.0 + 1.0 / 2.0 * t).epsilon(1e-6));
  const double a_mean = expectation_real(psit, rep->assemble(OperatorPoly::generator(Gen::A)));
  CHECK(a_mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two dense half-steps compose to one full step") {
  const Basis basis{GridSpec{8, 8, 4.0, 4.0}, QuantumSpec::fock(4, 1.0, 1.0)};
  auto rep = Representation::create(basis);
  const MatrixOperator h = rep->assemble(
      parse_poly("(1/2, 0)*p^2 + (1/2, 0)*q^2 + (1, 0)*a*at + (1/5, 0)*p*at"));
  GaussianParams p;
  p.sigma_a = 0.4;
  p.sigma_b = 0.4;
  p.q0 = 0.2;
  p.p0 = 0.1;
  const HybridState psi0 = gaussian_state(rep, p);

  const HermitianEig eig = eigh(h.materialize(), static_cast<int>(basis.dim()));
  HybridState half(basis), twice(basis), full(basis);
  dense_evolve(eig, 0.8, psi0.data(), half.data());
  dense_evolve(eig, 0.8, half.data(), twice.data());
  dense_evolve(eig, 1.6, psi0.data(), full.data());
  CHECK(state_dist(twice, full) < 1e-10);
}

TEST_CASE("dense path refuses dimensions above the cap") {
  const Basis basis{GridSpec{64, 64, 8.0, 8.0}, QuantumSpec::fock(2, 1.0, 1.0)};
  auto rep = Representation::create(basis);
  const MatrixOperator h = rep->assemble(parse_poly("(1, 0)*a*at"));
  GaussianParams p;
  p.sigma_a = 0.5;
  p.sigma_b = 0.5;
  const HybridState psi0 = gaussian_state(rep, p);
  CHECK_THROWS_AS(evolve_dense(psi0, h, 1.0), DimensionError);
}
