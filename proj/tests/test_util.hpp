#pragma once

#include <random>

#include "kvn/classical_poly.hpp"
#include "kvn/operator_poly.hpp"

namespace kvn::test {

// small random rationals keep products inside the exact range
inline Rational random_rational(std::mt19937_64& rng, bool allow_zero = false) {
  std::uniform_int_distribution<long long> num(-4, 4);
  std::uniform_int_distribution<long long> den(1, 3);
  long long n = num(rng);
  if (!allow_zero && n == 0) n = 1;
  return Rational(n, den(rng));
}

inline RationalComplex random_coeff(std::mt19937_64& rng) {
  return RationalComplex(random_rational(rng, true), random_rational(rng, true));
}

inline OperatorPoly random_poly(std::mt19937_64& rng, int max_terms, int max_degree,
                                bool classical_only = false) {
  const auto gens = all_generators();
  std::uniform_int_distribution<int> n_terms(1, max_terms);
  std::uniform_int_distribution<int> degree(0, max_degree);
  OperatorPoly p;
  const int terms = n_terms(rng);
  for (int t = 0; t < terms; ++t) {
    std::vector<Gen> word;
    const int d = degree(rng);
    for (int k = 0; k < d; ++k) {
      if (classical_only) {
        std::uniform_int_distribution<int> pick(5, 8);  // a, b, at, bt
        word.push_back(static_cast<Gen>(pick(rng)));
      } else {
        std::uniform_int_distribution<int> pick(0, kGenCount - 1);
        word.push_back(gens[pick(rng)]);
      }
    }
    p += OperatorPoly::from_word(word, random_coeff(rng));
  }
  return p;
}

inline ClassicalPoly random_classical(std::mt19937_64& rng, int max_terms, int max_degree) {
  std::uniform_int_distribution<int> n_terms(1, max_terms);
  std::uniform_int_distribution<int> expo(0, max_degree);
  ClassicalPoly p;
  const int terms = n_terms(rng);
  for (int t = 0; t < terms; ++t) {
    int da = expo(rng);
    int db = expo(rng);
    if (da + db > max_degree) db = std::max(0, max_degree - da);
    p.add_term(da, db, random_rational(rng));
  }
  return p;
}

}  // namespace kvn::test
