#include "kvn/operator_poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace kvn {

bool WordLess::operator()(const Word& x, const Word& y) const {
  int dx = word_degree(x), dy = word_degree(y);
  if (dx != dy) return dx < dy;
  // lexicographic on the flattened generator sequence
  std::size_t ix = 0, iy = 0;
  int px = 0, py = 0;  // consumed powers within the current factor
  while (ix < x.size() && iy < y.size()) {
    Gen gx = x[ix].first, gy = y[iy].first;
    if (gx != gy) return rank(gx) < rank(gy);
    int rx = x[ix].second - px, ry = y[iy].second - py;
    int step = std::min(rx, ry);
    px += step;
    py += step;
    if (px == x[ix].second) { ++ix; px = 0; }
    if (py == y[iy].second) { ++iy; py = 0; }
  }
  return false;  // equal degree and one exhausted => sequences identical
}

OperatorPoly OperatorPoly::constant(RationalComplex c) {
  OperatorPoly p;
  p.add_term({}, c);
  return p;
}

OperatorPoly OperatorPoly::generator(Gen g) {
  OperatorPoly p;
  p.add_term({{g, 1}}, RationalComplex(1));
  return p;
}

OperatorPoly OperatorPoly::from_classical(const ClassicalPoly& f) {
  OperatorPoly p;
  for (auto& [e, c] : f.terms()) {
    Word w;
    if (e.first > 0) w.push_back({Gen::A, e.first});
    if (e.second > 0) w.push_back({Gen::B, e.second});
    p.add_term(w, RationalComplex(c));
  }
  return p;
}

int OperatorPoly::degree() const {
  int d = 0;
  for (auto& [w, c] : terms_) d = std::max(d, word_degree(w));
  return d;
}

RationalComplex OperatorPoly::coeff_of(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? RationalComplex() : it->second;
}

void OperatorPoly::add_term(const Word& w, const RationalComplex& c) {
  if (c.is_zero()) return;
  auto it = terms_.find(w);
  if (it == terms_.end()) {
    terms_.emplace(w, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

OperatorPoly OperatorPoly::operator-() const {
  OperatorPoly r;
  for (auto& [w, c] : terms_) r.add_term(w, -c);
  return r;
}

OperatorPoly operator+(const OperatorPoly& x, const OperatorPoly& y) {
  OperatorPoly r = x;
  for (auto& [w, c] : y.terms_) r.add_term(w, c);
  return r;
}

OperatorPoly operator-(const OperatorPoly& x, const OperatorPoly& y) { return x + (-y); }

OperatorPoly OperatorPoly::scaled(const RationalComplex& c) const {
  OperatorPoly r;
  for (auto& [w, cc] : terms_) r.add_term(w, cc * c);
  return r;
}

namespace {

std::vector<Gen> flatten(const Word& w) {
  std::vector<Gen> seq;
  for (auto& [g, p] : w)
    for (int k = 0; k < p; ++k) seq.push_back(g);
  return seq;
}

Word compress(const std::vector<Gen>& seq) {
  Word w;
  for (Gen g : seq) {
    if (!w.empty() && w.back().first == g)
      ++w.back().second;
    else
      w.push_back({g, 1});
  }
  return w;
}

// Rewrites coeff * seq into normal order, accumulating into acc. Out-of-order
// adjacent pairs are swapped through [x, y] = xy - yx; the correction terms
// have strictly smaller word length, so the recursion is well founded.
void normal_order_into(OperatorPoly& acc, RationalComplex coeff, std::vector<Gen> seq,
                       const StructureTable& table) {
  if (coeff.is_zero()) return;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    Gen x = seq[i], y = seq[i + 1];
    if (rank(x) <= rank(y)) continue;
    // seq = prefix x y suffix = prefix (y x + [x,y]) suffix
    std::vector<Gen> swapped = seq;
    std::swap(swapped[i], swapped[i + 1]);
    OperatorPoly corr = table.bracket(x, y);
    for (auto& [cw, cc] : corr.terms()) {
      std::vector<Gen> with_corr(seq.begin(), seq.begin() + i);
      for (Gen g : flatten(cw)) with_corr.push_back(g);
      with_corr.insert(with_corr.end(), seq.begin() + i + 2, seq.end());
      normal_order_into(acc, coeff * cc, std::move(with_corr), table);
    }
    normal_order_into(acc, coeff, std::move(swapped), table);
    return;
  }
  acc.add_term(compress(seq), coeff);
}

}  // namespace

OperatorPoly OperatorPoly::from_word(const std::vector<Gen>& word, RationalComplex coeff,
                                     const StructureTable& table) {
  OperatorPoly r;
  normal_order_into(r, coeff, word, table);
  return r;
}

OperatorPoly OperatorPoly::from_word(const std::vector<Gen>& word, RationalComplex coeff) {
  return from_word(word, coeff, StructureTable::hybrid());
}

OperatorPoly OperatorPoly::mul(const OperatorPoly& x, const OperatorPoly& y,
                               const StructureTable& table) {
  OperatorPoly r;
  for (auto& [wx, cx] : x.terms_) {
    std::vector<Gen> sx = flatten(wx);
    for (auto& [wy, cy] : y.terms_) {
      std::vector<Gen> seq = sx;
      for (Gen g : flatten(wy)) seq.push_back(g);
      normal_order_into(r, cx * cy, std::move(seq), table);
    }
  }
  return r;
}

OperatorPoly operator*(const OperatorPoly& x, const OperatorPoly& y) {
  return OperatorPoly::mul(x, y, StructureTable::hybrid());
}

OperatorPoly OperatorPoly::adjoint(const StructureTable& table) const {
  OperatorPoly r;
  for (auto& [w, c] : terms_) {
    std::vector<Gen> seq = flatten(w);
    std::reverse(seq.begin(), seq.end());
    normal_order_into(r, c.conj(), std::move(seq), table);
  }
  return r;
}

OperatorPoly OperatorPoly::adjoint() const { return adjoint(StructureTable::hybrid()); }

bool OperatorPoly::is_observable() const {
  for (auto& [w, c] : terms_)
    for (auto& [g, p] : w)
      if (is_tilde(g)) return false;
  return true;
}

bool OperatorPoly::is_classical_plain() const {
  for (auto& [w, c] : terms_)
    for (auto& [g, p] : w)
      if (!kvn::is_classical_plain(g)) return false;
  return true;
}

StructureTable::StructureTable() {
  auto I = RationalComplex::i();
  auto set = [&](Gen x, Gen y, OperatorPoly v) { entries_[{x, y}] = std::move(v); };
  // [q, p] = i
  set(Gen::QHat, Gen::PHat, OperatorPoly::constant(I));
  // [S_i, S_j] = i eps_ijk S_k
  set(Gen::S1, Gen::S2, OperatorPoly::generator(Gen::S3).scaled(I));
  set(Gen::S2, Gen::S3, OperatorPoly::generator(Gen::S1).scaled(I));
  set(Gen::S1, Gen::S3, OperatorPoly::generator(Gen::S2).scaled(-I));
  // classical sector: bt a - a bt = i [b,a]_PB = i, at b - b at = i [a,b]_PB = -i
  set(Gen::A, Gen::BTilde, OperatorPoly::constant(-I));
  set(Gen::B, Gen::ATilde, OperatorPoly::constant(I));
  // [at, bt] = i lift([a,b]_PB) = i lift(-1) = 0, [a,at] = [b,bt] = [a,b] = 0,
  // and every quantum generator commutes with the whole classical sector:
  // absent entries mean zero.
}

const StructureTable& StructureTable::hybrid() {
  static const StructureTable t;
  return t;
}

OperatorPoly StructureTable::bracket(Gen x, Gen y) const {
  if (x == y) return OperatorPoly::zero();
  bool swap = rank(x) > rank(y);
  auto key = swap ? std::pair{y, x} : std::pair{x, y};
  auto it = entries_.find(key);
  if (it == entries_.end()) return OperatorPoly::zero();
  return swap ? -it->second : it->second;
}

StructureTable StructureTable::with_entry(Gen x, Gen y, OperatorPoly value) const {
  if (rank(x) >= rank(y)) throw std::invalid_argument("with_entry expects rank(x) < rank(y)");
  StructureTable t = *this;
  if (value.is_zero())
    t.entries_.erase({x, y});
  else
    t.entries_[{x, y}] = std::move(value);
  return t;
}

OperatorPoly commutator(const OperatorPoly& x, const OperatorPoly& y,
                        const StructureTable& table) {
  return OperatorPoly::mul(x, y, table) - OperatorPoly::mul(y, x, table);
}

OperatorPoly heisenberg_rhs(const OperatorPoly& x, const OperatorPoly& h,
                            const StructureTable& table) {
  return commutator(x, h, table).scaled(RationalComplex::minus_i());
}

OperatorPoly check_jacobi(Gen x, Gen y, Gen z, const StructureTable& table) {
  auto X = OperatorPoly::generator(x);
  auto Y = OperatorPoly::generator(y);
  auto Z = OperatorPoly::generator(z);
  return commutator(commutator(X, Y, table), Z, table) +
         commutator(commutator(Y, Z, table), X, table) +
         commutator(commutator(Z, X, table), Y, table);
}

OperatorPoly tilde_lift(const ClassicalPoly& f) {
  OperatorPoly r;
  // d f/db * bt + d f/da * at, with the classical factors standing left
  const ClassicalPoly df_db = f.partial_b();
  const ClassicalPoly df_da = f.partial_a();
  for (auto& [e, c] : df_db.terms()) {
    Word w;
    if (e.first > 0) w.push_back({Gen::A, e.first});
    if (e.second > 0) w.push_back({Gen::B, e.second});
    w.push_back({Gen::BTilde, 1});
    r.add_term(w, RationalComplex(c));
  }
  for (auto& [e, c] : df_da.terms()) {
    Word w;
    if (e.first > 0) w.push_back({Gen::A, e.first});
    if (e.second > 0) w.push_back({Gen::B, e.second});
    w.push_back({Gen::ATilde, 1});
    r.add_term(w, RationalComplex(c));
  }
  return r;
}

OperatorPoly tilde_lift(const OperatorPoly& f) { return tilde_lift(to_classical(f)); }

ClassicalPoly to_classical(const OperatorPoly& x) {
  ClassicalPoly r;
  for (auto& [w, c] : x.terms()) {
    if (!c.is_real())
      throw std::invalid_argument("not a classical observable: complex coefficient");
    int pa = 0, pb = 0;
    for (auto& [g, p] : w) {
      if (g == Gen::A)
        pa = p;
      else if (g == Gen::B)
        pb = p;
      else
        throw std::invalid_argument("not a classical observable: contains " +
                                    std::string(gen_name(g)));
    }
    r.add_term(pa, pb, c.re);
  }
  return r;
}

std::string OperatorPoly::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (auto& [w, c] : terms_) {
    if (!first) s += " + ";
    first = false;
    s += c.str();
    for (auto& [g, p] : w) {
      s += "*";
      s += gen_name(g);
      if (p > 1) s += "^" + std::to_string(p);
    }
  }
  return s;
}

std::complex<double> to_complex(const RationalComplex& c) {
  return {c.re.to_double(), c.im.to_double()};
}

}  // namespace kvn
