#include "kvn/classical_poly.hpp"

#include <cmath>

namespace kvn {

ClassicalPoly ClassicalPoly::constant(Rational c) {
  ClassicalPoly p;
  p.add_term(0, 0, c);
  return p;
}

ClassicalPoly ClassicalPoly::a() { return monomial(1, 0, Rational(1)); }
ClassicalPoly ClassicalPoly::b() { return monomial(0, 1, Rational(1)); }

ClassicalPoly ClassicalPoly::monomial(int pow_a, int pow_b, Rational c) {
  ClassicalPoly p;
  p.add_term(pow_a, pow_b, c);
  return p;
}

bool ClassicalPoly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == std::pair{0, 0});
}

int ClassicalPoly::degree() const {
  int d = 0;
  for (auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
  return d;
}

Rational ClassicalPoly::coeff(int pow_a, int pow_b) const {
  auto it = terms_.find({pow_a, pow_b});
  return it == terms_.end() ? Rational(0) : it->second;
}

void ClassicalPoly::add_term(int pow_a, int pow_b, const Rational& c) {
  if (c.is_zero()) return;
  auto key = std::pair{pow_a, pow_b};
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(key, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

ClassicalPoly ClassicalPoly::operator-() const {
  ClassicalPoly r;
  for (auto& [e, c] : terms_) r.add_term(e.first, e.second, -c);
  return r;
}

ClassicalPoly operator+(const ClassicalPoly& f, const ClassicalPoly& g) {
  ClassicalPoly r = f;
  for (auto& [e, c] : g.terms_) r.add_term(e.first, e.second, c);
  return r;
}

ClassicalPoly operator-(const ClassicalPoly& f, const ClassicalPoly& g) { return f + (-g); }

ClassicalPoly operator*(const ClassicalPoly& f, const ClassicalPoly& g) {
  ClassicalPoly r;
  for (auto& [ef, cf] : f.terms_)
    for (auto& [eg, cg] : g.terms_)
      r.add_term(ef.first + eg.first, ef.second + eg.second, cf * cg);
  return r;
}

ClassicalPoly ClassicalPoly::scaled(const Rational& c) const {
  ClassicalPoly r;
  for (auto& [e, cc] : terms_) r.add_term(e.first, e.second, cc * c);
  return r;
}

ClassicalPoly ClassicalPoly::partial_a() const {
  ClassicalPoly r;
  for (auto& [e, c] : terms_)
    if (e.first > 0) r.add_term(e.first - 1, e.second, c * Rational(e.first));
  return r;
}

ClassicalPoly ClassicalPoly::partial_b() const {
  ClassicalPoly r;
  for (auto& [e, c] : terms_)
    if (e.second > 0) r.add_term(e.first, e.second - 1, c * Rational(e.second));
  return r;
}

double ClassicalPoly::eval(double av, double bv) const {
  double s = 0.0;
  for (auto& [e, c] : terms_) s += c.to_double() * std::pow(av, e.first) * std::pow(bv, e.second);
  return s;
}

std::string ClassicalPoly::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (auto& [e, c] : terms_) {
    if (!first) s += " + ";
    first = false;
    s += "(" + c.str() + ")";
    if (e.first > 0) s += "*a" + (e.first > 1 ? "^" + std::to_string(e.first) : "");
    if (e.second > 0) s += "*b" + (e.second > 1 ? "^" + std::to_string(e.second) : "");
  }
  return s;
}

ClassicalPoly poisson_bracket(const ClassicalPoly& f, const ClassicalPoly& g) {
  return f.partial_b() * g.partial_a() - f.partial_a() * g.partial_b();
}

}  // namespace kvn
