#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kvn/poly_text.hpp"
#include "test_util.hpp"

using namespace kvn;

namespace {

// numerical derivative oracle used to cross-check exact results
double fd_partial(const ClassicalPoly& f, double a, double b, bool wrt_a) {
  const double h = 1e-5;
  if (wrt_a) return (f.eval(a + h, b) - f.eval(a - h, b)) / (2 * h);
  return (f.eval(a, b + h) - f.eval(a, b - h)) / (2 * h);
}

double fd_poisson(const ClassicalPoly& f, const ClassicalPoly& g, double a, double b) {
  return fd_partial(f, a, b, false) * fd_partial(g, a, b, true) -
         fd_partial(f, a, b, true) * fd_partial(g, a, b, false);
}

const std::vector<std::pair<double, double>> kSamplePoints = {
    {0.3, -0.7}, {1.1, 0.4}, {-0.9, -1.3}, {0.0, 0.8}, {2.0, 1.0}};

}  // namespace

TEST_CASE("poisson bracket: defining examples") {
  const auto a = ClassicalPoly::a();
  const auto b = ClassicalPoly::b();
  CHECK(poisson_bracket(b, a) == ClassicalPoly::constant(Rational(1)));
  CHECK(poisson_bracket(a, a).is_zero());
  // [a^2/2, b] = -a by hand expansion
  const auto half_a_sq = ClassicalPoly::monomial(2, 0, Rational(1, 2));
  CHECK(poisson_bracket(half_a_sq, b) == ClassicalPoly::monomial(1, 0, Rational(-1)));
}

TEST_CASE("poisson bracket agrees with a finite-difference oracle on sampled points") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    const ClassicalPoly f = test::random_classical(rng, 3, 3);
    const ClassicalPoly g = test::random_classical(rng, 3, 3);
    const ClassicalPoly pb = poisson_bracket(f, g);
    for (auto [av, bv] : kSamplePoints) {
      const double exact = pb.eval(av, bv);
      const double numeric = fd_poisson(f, g, av, bv);
      CHECK(std::abs(exact - numeric) < 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("poisson bracket is antisymmetric and satisfies Leibniz and Jacobi") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const ClassicalPoly f = test::random_classical(rng, 3, 3);
    const ClassicalPoly g = test::random_classical(rng, 3, 3);
    const ClassicalPoly h = test::random_classical(rng, 3, 3);
    CHECK(poisson_bracket(f, g) == -poisson_bracket(g, f));
    CHECK(poisson_bracket(f * g, h) == f * poisson_bracket(g, h) + poisson_bracket(f, h) * g);
    const ClassicalPoly jac = poisson_bracket(poisson_bracket(f, g), h) +
                              poisson_bracket(poisson_bracket(g, h), f) +
                              poisson_bracket(poisson_bracket(h, f), g);
    CHECK(jac.is_zero());
  }
}

TEST_CASE("tilde lift: defining examples") {
  CHECK(tilde_lift(ClassicalPoly::a()) == parse_poly("(1, 0)*at"));
  // a^2/(2m) lifts to a at / m (m = 2 here)
  CHECK(tilde_lift(ClassicalPoly::monomial(2, 0, Rational(1, 4))) == parse_poly("(1/2, 0)*a*at"));
  CHECK(tilde_lift(ClassicalPoly::constant(Rational(17, 3))).is_zero());
  CHECK(tilde_lift(ClassicalPoly::monomial(0, 2, Rational(1))) == parse_poly("(2, 0)*b*bt"));
}

TEST_CASE("tilde lift is linear") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 30; ++trial) {
    const ClassicalPoly f = test::random_classical(rng, 3, 3);
    const ClassicalPoly g = test::random_classical(rng, 3, 3);
    const Rational c = test::random_rational(rng);
    CHECK(tilde_lift(f + g.scaled(c)) == tilde_lift(f) + tilde_lift(g).scaled(RationalComplex(c)));
  }
}

TEST_CASE("tilde lift rejects non-classical input") {
  CHECK_THROWS_AS(tilde_lift(OperatorPoly::generator(Gen::QHat)), std::invalid_argument);
  CHECK_THROWS_AS(tilde_lift(OperatorPoly::generator(Gen::ATilde)), std::invalid_argument);
  // but accepts an (a, b)-only OperatorPoly
  CHECK(tilde_lift(parse_poly("(1, 0)*a*b")) == parse_poly("(1, 0)*a*bt + (1, 0)*b*at"));
}

namespace {

// Evaluate the action of a lifted polynomial on a sampled test function:
// words are a^i b^j (at | bt), with at = -i d/db and bt = i d/da. The result
// of acting on a real function with a first-order lift is i * {f, phi}_PB, so
// the imaginary part carries the bracket.
std::complex<double> apply_lift_fd(const OperatorPoly& lifted,
                                   const std::function<double(double, double)>& phi, double a,
                                   double b) {
  const double h = 1e-5;
  std::complex<double> acc = 0.0;
  for (auto& [word, coeff] : lifted.terms()) {
    double factor = 1.0;
    std::complex<double> deriv = 0.0;
    bool has_tilde = false;
    for (auto& [g, p] : word) {
      if (g == Gen::A)
        for (int k = 0; k < p; ++k) factor *= a;
      else if (g == Gen::B)
        for (int k = 0; k < p; ++k) factor *= b;
      else if (g == Gen::ATilde) {
        REQUIRE(p == 1);
        has_tilde = true;
        deriv = std::complex<double>(0, -1) * (phi(a, b + h) - phi(a, b - h)) / (2 * h);
      } else if (g == Gen::BTilde) {
        REQUIRE(p == 1);
        has_tilde = true;
        deriv = std::complex<double>(0, 1) * (phi(a + h, b) - phi(a - h, b)) / (2 * h);
      }
    }
    REQUIRE(has_tilde);  // a lift has exactly one tilde factor per word
    acc += to_complex(coeff) * factor * deriv;
  }
  return acc;
}

}  // namespace

TEST_CASE("lifted polynomials act as i {f, .}_PB on sampled smooth functions") {
  auto phi = [](double a, double b) { return std::exp(-0.3 * a * a - 0.2 * b * b + 0.1 * a * b); };
  auto phi_poly = [&](double a, double b) { return (a + 0.5 * b * b) * phi(a, b); };

  std::mt19937_64 rng(8080);
  for (int trial = 0; trial < 10; ++trial) {
    const ClassicalPoly f = test::random_classical(rng, 3, 3);
    const OperatorPoly lifted = tilde_lift(f);
    for (auto [av, bv] : kSamplePoints) {
      for (auto& testfn : {std::function<double(double, double)>(phi),
                           std::function<double(double, double)>(phi_poly)}) {
        const std::complex<double> lhs = apply_lift_fd(lifted, testfn, av, bv);
        // i * {f, phi}_PB via finite differences of f as well
        const double h = 1e-5;
        const double df_db = (f.eval(av, bv + h) - f.eval(av, bv - h)) / (2 * h);
        const double df_da = (f.eval(av + h, bv) - f.eval(av - h, bv)) / (2 * h);
        const double dphi_da = (testfn(av + h, bv) - testfn(av - h, bv)) / (2 * h);
        const double dphi_db = (testfn(av, bv + h) - testfn(av, bv - h)) / (2 * h);
        const std::complex<double> rhs =
            std::complex<double>(0, 1) * (df_db * dphi_da - df_da * dphi_db);
        CHECK(std::abs(lhs - rhs) < 1e-5 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("classical poly round trips through the operator algebra") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    const ClassicalPoly f = test::random_classical(rng, 4, 4);
    CHECK(to_classical(OperatorPoly::from_classical(f)) == f);
  }
  CHECK_THROWS_AS(to_classical(OperatorPoly::generator(Gen::S1)), std::invalid_argument);
}
