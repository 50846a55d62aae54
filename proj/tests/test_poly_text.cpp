#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kvn/poly_text.hpp"
#include "test_util.hpp"

using namespace kvn;

TEST_CASE("canonical printing") {
  CHECK(OperatorPoly::zero().str() == "0");
  CHECK(OperatorPoly::constant(RationalComplex::i()).str() == "(0, 1)");
  CHECK(OperatorPoly::constant({Rational(-1, 2), Rational(0)}).str() == "(-1/2, 0)");
  CHECK(OperatorPoly::from_word({Gen::A, Gen::ATilde}, RationalComplex(1)).str() == "(1, 0)*a*at");
  CHECK(OperatorPoly::from_word({Gen::QHat, Gen::QHat, Gen::PHat},
                                {Rational(1, 2), Rational(1)})
            .str() == "(1/2, 1)*q^2*p");
  // terms print in canonical order: constants first, then graded by degree
  const OperatorPoly mixed = OperatorPoly::generator(Gen::B) + OperatorPoly::generator(Gen::PHat) +
                             OperatorPoly::constant(RationalComplex(3));
  CHECK(mixed.str() == "(3, 0) + (1, 0)*p + (1, 0)*b");
}

TEST_CASE("parser accepts the grammar and rejects junk") {
  CHECK(parse_poly("0").is_zero());
  CHECK(parse_poly("(0, 1)") == OperatorPoly::constant(RationalComplex::i()));
  CHECK(parse_poly(" ( 1/2 , -3 ) * q ^ 2 * p ") ==
        OperatorPoly::from_word({Gen::QHat, Gen::QHat, Gen::PHat}, {Rational(1, 2), Rational(-3)}));
  // non-canonical factor order is normal-ordered on the way in
  CHECK(parse_poly("(1, 0)*bt*a") == parse_poly("(0, 1) + (1, 0)*a*bt"));

  CHECK_THROWS_AS(parse_poly("(1, 0)*z"), ParseError);
  CHECK_THROWS_AS(parse_poly("(1, 0)*q^0"), ParseError);
  CHECK_THROWS_AS(parse_poly("(1, 0)*q junk"), ParseError);
  CHECK_THROWS_AS(parse_poly("(1, 0"), ParseError);
  CHECK_THROWS_AS(parse_poly(""), ParseError);
}

TEST_CASE("print/parse round trip is exact on random polynomials") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const OperatorPoly p = test::random_poly(rng, 5, 4);
    CAPTURE(p.str());
    CHECK(parse_poly(p.str()) == p);
  }
}

TEST_CASE("rational parsing") {
  CHECK(parse_rational("-3/4") == Rational(-3, 4));
  CHECK(parse_rational("17") == Rational(17));
  CHECK(parse_rational("4/8") == Rational(1, 2));
  CHECK_THROWS_AS(parse_rational("1/0"), std::domain_error);
  CHECK_THROWS_AS(parse_rational("x"), ParseError);
}
