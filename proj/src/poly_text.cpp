#include "kvn/poly_text.hpp"

#include <cctype>
#include <charconv>

namespace kvn {

namespace {

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool accept(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c))
      throw ParseError("expected '" + std::string(1, c) + "' at position " + std::to_string(pos) +
                       " in '" + std::string(s) + "'");
  }

  long long integer() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    std::size_t digits = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == digits) throw ParseError("expected integer at position " + std::to_string(start));
    long long v = 0;
    auto res = std::from_chars(s.data() + start, s.data() + pos, v);
    if (res.ec != std::errc{}) throw ParseError("integer out of range");
    return v;
  }

  Rational rational() {
    long long n = integer();
    if (accept('/')) return Rational(n, integer());
    return Rational(n);
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])))) ++pos;
    if (pos == start) throw ParseError("expected generator name at position " + std::to_string(start));
    return std::string(s.substr(start, pos - start));
  }
};

}  // namespace

Rational parse_rational(std::string_view text) {
  Cursor c{text};
  Rational r = c.rational();
  if (!c.eof()) throw ParseError("trailing characters after rational: '" + std::string(text) + "'");
  return r;
}

OperatorPoly parse_poly(std::string_view text) {
  Cursor c{text};
  OperatorPoly result;
  if (c.peek() == '0') {
    std::size_t save = c.pos;
    ++c.pos;
    if (c.eof()) return result;
    c.pos = save;  // "0" was the start of something else, e.g. "0/1"? fall through
  }
  while (true) {
    c.expect('(');
    Rational re = c.rational();
    c.expect(',');
    Rational im = c.rational();
    c.expect(')');
    std::vector<Gen> word;
    while (c.accept('*')) {
      std::string name = c.ident();
      auto g = parse_gen(name);
      if (!g) throw ParseError("unknown generator '" + name + "'");
      int pow = 1;
      if (c.accept('^')) {
        long long p = c.integer();
        if (p < 1 || p > 64) throw ParseError("power out of range");
        pow = static_cast<int>(p);
      }
      for (int k = 0; k < pow; ++k) word.push_back(*g);
    }
    result += OperatorPoly::from_word(word, RationalComplex(re, im));
    if (c.eof()) break;
    c.expect('+');
  }
  return result;
}

}  // namespace kvn
