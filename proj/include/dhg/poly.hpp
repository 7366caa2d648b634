#pragma once
// Sparse multivariate polynomials with exact rational coefficients.
// Differential symbols count as separate indeterminates.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dhg/ast.hpp"

namespace dhg {

struct Indet {
  Var var;
  bool diff = false;
  auto operator<=>(const Indet&) const = default;
  bool operator==(const Indet&) const = default;
};

// Sorted by indeterminate; exponents >= 1.
using Monomial = std::vector<std::pair<Indet, unsigned>>;

class PolyError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(const Rational& q);
  static Polynomial indet(const Indet& x);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial pow(unsigned e) const;
  Polynomial scale(const Rational& q) const;

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // coefficient of the empty monomial
  unsigned degree() const;
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  // Coefficient polynomial of x' (each monomial containing x' exactly once).
  Polynomial coefficient_of_diff(const Var& x) const;

  // Largest monomial dividing every term (empty when none).
  Monomial content() const;
  Polynomial divide_monomial(const Monomial& m) const;

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  // Canonical term: terms in decreasing graded order, coefficients folded in.
  Term to_term() const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  std::map<Monomial, Rational> terms_;
};

Term monomial_term(const Monomial& m);

// Throws PolyError for min/max/sqrt and division by a non-constant.
Polynomial poly_normalize(const Term& t);
bool poly_equal(const Term& a, const Term& b);

}  // namespace dhg
