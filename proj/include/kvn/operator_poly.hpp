#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "kvn/classical_poly.hpp"
#include "kvn/generators.hpp"
#include "kvn/rational.hpp"

namespace kvn {

// Normal-ordered factor word: generators sorted by canonical rank, positive
// integer powers, no repeated generator entries.
using Word = std::vector<std::pair<Gen, int>>;

inline int word_degree(const Word& w) {
  int d = 0;
  for (auto& [g, p] : w) d += p;
  return d;
}

// Total order on words: graded, then lexicographic on the flattened generator
// sequence. Gives terms a deterministic canonical ordering for printing.
struct WordLess {
  bool operator()(const Word& x, const Word& y) const;
};

struct Monomial {
  RationalComplex coeff;
  Word word;
};

class StructureTable;

// Polynomial in the hybrid generator algebra, kept in normal order with exact
// complex-rational coefficients. Products are expanded through the structure
// table, so equality is a decidable test of operator identity.
class OperatorPoly {
 public:
  OperatorPoly() = default;

  static OperatorPoly zero() { return {}; }
  static OperatorPoly constant(RationalComplex c);
  static OperatorPoly generator(Gen g);
  // normal-orders an arbitrary product word coeff * g1 g2 ... gn
  static OperatorPoly from_word(const std::vector<Gen>& word, RationalComplex coeff,
                                const StructureTable& table);
  static OperatorPoly from_word(const std::vector<Gen>& word, RationalComplex coeff);
  static OperatorPoly from_classical(const ClassicalPoly& f);

  bool is_zero() const { return terms_.empty(); }
  std::size_t n_terms() const { return terms_.size(); }
  int degree() const;
  const std::map<Word, RationalComplex, WordLess>& terms() const { return terms_; }
  RationalComplex coeff_of(const Word& w) const;

  OperatorPoly operator-() const;
  friend OperatorPoly operator+(const OperatorPoly& x, const OperatorPoly& y);
  friend OperatorPoly operator-(const OperatorPoly& x, const OperatorPoly& y);
  friend OperatorPoly operator*(const OperatorPoly& x, const OperatorPoly& y);
  OperatorPoly scaled(const RationalComplex& c) const;
  OperatorPoly& operator+=(const OperatorPoly& o) { return *this = *this + o; }
  OperatorPoly& operator-=(const OperatorPoly& o) { return *this = *this - o; }

  static OperatorPoly mul(const OperatorPoly& x, const OperatorPoly& y,
                          const StructureTable& table);

  friend bool operator==(const OperatorPoly& x, const OperatorPoly& y) {
    return x.terms_ == y.terms_;
  }
  friend bool operator!=(const OperatorPoly& x, const OperatorPoly& y) { return !(x == y); }

  // conjugate coefficients, reverse factor words, renormal-order; all nine
  // generators are self-adjoint by convention
  OperatorPoly adjoint(const StructureTable& table) const;
  OperatorPoly adjoint() const;

  // true iff no monomial contains a tilde generator
  bool is_observable() const;

  // true iff every factor is a or b (convertible to ClassicalPoly)
  bool is_classical_plain() const;

  std::string str() const;

  void add_term(const Word& w, const RationalComplex& c);

 private:
  std::map<Word, RationalComplex, WordLess> terms_;
};

// Commutator table among the nine generators. Only the entries below the
// canonical diagonal are stored; antisymmetry fills the rest. The default
// table carries the hybrid relations ([q,p] = i, spin epsilon structure,
// [a,bt] = -i, [b,at] = i, everything else zero); tests inject mutated
// copies to prove the verification suites can tell the difference.
class StructureTable {
 public:
  static const StructureTable& hybrid();

  // [x, y] for arbitrary generator pair (antisymmetry applied as needed)
  OperatorPoly bracket(Gen x, Gen y) const;

  // copy with one canonical entry (rank(x) < rank(y)) replaced
  StructureTable with_entry(Gen x, Gen y, OperatorPoly value) const;

 private:
  StructureTable();
  std::map<std::pair<Gen, Gen>, OperatorPoly> entries_;
};

OperatorPoly commutator(const OperatorPoly& x, const OperatorPoly& y,
                        const StructureTable& table = StructureTable::hybrid());

// -i [x, H]; the single source of truth for equations of motion
OperatorPoly heisenberg_rhs(const OperatorPoly& x, const OperatorPoly& h,
                            const StructureTable& table = StructureTable::hybrid());

// [[x,y],z] + [[y,z],x] + [[z,x],y]; zero for a consistent table
OperatorPoly check_jacobi(Gen x, Gen y, Gen z,
                          const StructureTable& table = StructureTable::hybrid());

// (df/db) bt + (df/da) at, multiplicative factors left of the tilde generators
OperatorPoly tilde_lift(const ClassicalPoly& f);
// validating overload: rejects input containing non-classical generators
OperatorPoly tilde_lift(const OperatorPoly& f);

// inverse of from_classical; throws std::invalid_argument on non-(a,b) input
ClassicalPoly to_classical(const OperatorPoly& x);

std::complex<double> to_complex(const RationalComplex& c);

}  // namespace kvn
