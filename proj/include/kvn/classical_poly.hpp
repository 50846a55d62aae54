#pragma once

#include <map>
#include <string>
#include <utility>

#include "kvn/rational.hpp"

namespace kvn {

// Commutative polynomial in the classical pair (a, b) with exact rational
// coefficients. This is the phase-space function algebra the Poisson bracket
// and the tilde lift act on; no tilde or quantum symbols can appear here by
// construction.
class ClassicalPoly {
 public:
  // exponents (pow_a, pow_b) -> coefficient, zero coefficients never stored
  using TermMap = std::map<std::pair<int, int>, Rational>;

  ClassicalPoly() = default;

  static ClassicalPoly constant(Rational c);
  static ClassicalPoly a();
  static ClassicalPoly b();
  static ClassicalPoly monomial(int pow_a, int pow_b, Rational c);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  int degree() const;
  const TermMap& terms() const { return terms_; }
  Rational coeff(int pow_a, int pow_b) const;

  ClassicalPoly operator-() const;
  friend ClassicalPoly operator+(const ClassicalPoly& f, const ClassicalPoly& g);
  friend ClassicalPoly operator-(const ClassicalPoly& f, const ClassicalPoly& g);
  friend ClassicalPoly operator*(const ClassicalPoly& f, const ClassicalPoly& g);
  ClassicalPoly scaled(const Rational& c) const;

  friend bool operator==(const ClassicalPoly& f, const ClassicalPoly& g) {
    return f.terms_ == g.terms_;
  }
  friend bool operator!=(const ClassicalPoly& f, const ClassicalPoly& g) { return !(f == g); }

  ClassicalPoly partial_a() const;
  ClassicalPoly partial_b() const;

  double eval(double av, double bv) const;

  std::string str() const;

  void add_term(int pow_a, int pow_b, const Rational& c);

 private:
  TermMap terms_;
};

// [f, g]_PB = df/db dg/da - df/da dg/db, exact.
ClassicalPoly poisson_bracket(const ClassicalPoly& f, const ClassicalPoly& g);

}  // namespace kvn
