#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "kvn/operator_poly.hpp"

namespace kvn {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Parses the canonical text form produced by OperatorPoly::str():
//   poly    := "0" | term (" + " term)*
//   term    := "(" rational ", " rational ")" ("*" gen ("^" int)?)*
//   gen     := q | p | S1 | S2 | S3 | a | b | at | bt
// Whitespace around tokens is tolerated; factor words need not be in
// canonical order (they are normal-ordered on the way in), so
// parse(print(x)) == x exactly and hand-written input is accepted too.
OperatorPoly parse_poly(std::string_view text);

Rational parse_rational(std::string_view text);

}  // namespace kvn
