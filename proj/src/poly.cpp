#include "dhg/poly.hpp"

#include <algorithm>

namespace dhg {

namespace {

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

unsigned mono_degree(const Monomial& m) {
  unsigned d = 0;
  for (const auto& [_, e] : m) d += e;
  return d;
}

}  // namespace

Polynomial Polynomial::constant(const Rational& q) {
  Polynomial p;
  p.add_term({}, q);
  return p;
}

Polynomial Polynomial::indet(const Indet& x) {
  Polynomial p;
  p.add_term({{x, 1u}}, Rational(1));
  return p;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-() const {
  Polynomial r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_) r.add_term(mono_mul(m1, m2), c1 * c2);
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial r = constant(1), base = *this;
  while (e) {
    if (e & 1u) r = r * base;
    e >>= 1u;
    if (e) base = base * base;
  }
  return r;
}

Polynomial Polynomial::scale(const Rational& q) const {
  Polynomial r;
  if (q == 0) return r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * q);
  return r;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Polynomial::constant_value() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (const auto& [m, _] : terms_) d = std::max(d, mono_degree(m));
  return d;
}

Polynomial Polynomial::coefficient_of_diff(const Var& x) const {
  Polynomial r;
  Indet key{x, true};
  for (const auto& [m, c] : terms_) {
    Monomial rest;
    bool found = false;
    for (const auto& [ind, e] : m) {
      if (ind == key) {
        if (e != 1) throw PolyError("differential symbol occurs nonlinearly");
        found = true;
      } else {
        rest.emplace_back(ind, e);
      }
    }
    if (found) r.add_term(rest, c);
  }
  return r;
}

Monomial Polynomial::content() const {
  if (terms_.empty()) return {};
  Monomial acc = terms_.begin()->first;
  for (const auto& [m, _] : terms_) {
    Monomial next;
    for (const auto& [ind, e] : acc) {
      for (const auto& [ind2, e2] : m)
        if (ind2 == ind) next.emplace_back(ind, std::min(e, e2));
    }
    acc = next;
  }
  return acc;
}

Polynomial Polynomial::divide_monomial(const Monomial& d) const {
  Polynomial r;
  for (const auto& [m, c] : terms_) {
    Monomial out;
    for (const auto& [ind, e] : m) {
      unsigned sub = 0;
      for (const auto& [ind2, e2] : d)
        if (ind2 == ind) sub = e2;
      if (sub > e) throw PolyError("monomial does not divide");
      if (e > sub) out.emplace_back(ind, e - sub);
    }
    r.add_term(out, c);
  }
  return r;
}

Term monomial_term(const Monomial& m) {
  Term acc;
  for (const auto& [ind, e] : m) {
    Term base = ind.diff ? mk_diff(ind.var) : mk_var(ind.var);
    Term f = e == 1 ? base : mk_pow(base, e);
    acc = acc ? mk_mul(acc, f) : f;
  }
  return acc ? acc : mk_const(1);
}

Term Polynomial::to_term() const {
  if (terms_.empty()) return mk_const(0);
  std::vector<std::pair<Monomial, Rational>> order(terms_.begin(), terms_.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return mono_degree(a.first) > mono_degree(b.first);
  });
  Term acc;
  for (const auto& [m, c] : order) {
    Rational mag = abs(c);
    bool neg = c < 0;
    Term piece;
    if (m.empty()) {
      piece = mk_const(mag);
    } else if (mag == 1) {
      piece = monomial_term(m);
    } else {
      piece = mk_mul(mk_const(mag), monomial_term(m));
    }
    if (!acc) {
      if (!neg) acc = piece;
      else if (m.empty()) acc = mk_const(c);
      else acc = mag == 1 ? mk_neg(piece) : mk_mul(mk_const(c), monomial_term(m));
    } else {
      acc = neg ? mk_sub(acc, piece) : mk_add(acc, piece);
    }
  }
  return acc;
}

Polynomial poly_normalize(const Term& t) {
  switch (t->kind) {
    case TermKind::Const: return Polynomial::constant(t->value);
    case TermKind::Var: return Polynomial::indet({t->var, false});
    case TermKind::Diff: return Polynomial::indet({t->var, true});
    case TermKind::Neg: return -poly_normalize(t->a);
    case TermKind::Add: return poly_normalize(t->a) + poly_normalize(t->b);
    case TermKind::Mul: return poly_normalize(t->a) * poly_normalize(t->b);
    case TermKind::Pow: return poly_normalize(t->a).pow(t->exp);
    case TermKind::Div: {
      Polynomial den = poly_normalize(t->b);
      if (!den.is_constant() || den.is_zero())
        throw PolyError("division by a non-constant is not polynomial");
      return poly_normalize(t->a).scale(1 / den.constant_value());
    }
    case TermKind::Min:
    case TermKind::Max: throw PolyError("min/max is not polynomial");
    case TermKind::Sqrt: throw PolyError("sqrt is not polynomial");
  }
  throw PolyError("unknown term");
}

bool poly_equal(const Term& a, const Term& b) { return poly_normalize(a) == poly_normalize(b); }

}  // namespace dhg
