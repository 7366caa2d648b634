#pragma once
// Syntactic derivation, Lie substitution, arithmetization and game transforms.

#include <map>
#include <string>
#include <vector>

#include "dhg/ast.hpp"

namespace dhg {

class DerivationError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

// Product-rule derivation; powers expand as a * a^(n-1).
Term derive_term(const Term& t);
// Readable form sum_i c_i * x_i' with normalized coefficients, when polynomial.
Term gradient_form(const Term& derived);
// Negation normal form without -> and <->. Modalities and quantifiers are kept.
Formula nnf(const Formula& f);
// (F)' on the NNF of F: & and | become &, >/>= become >=, </<= become <=, =/!= become =.
Formula derive_formula(const Formula& f);
// Replace differential symbols of bound variables, all others by 0, then fold constants.
Term lie_substitute(const Term& t, const std::map<Var, Term>& bindings);
Formula lie_substitute(const Formula& f, const std::map<Var, Term>& bindings);
// Bindings x_i -> f_i of a differential game.
std::map<Var, Term> ode_bindings(const Game& diffgame);

Term fold_constants(const Term& t);

enum class ArithMode { Open, Closed };

struct Arithmetization {
  Term term;
  ArithMode mode;
};

class ArithmetizeError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

// F <-> term > 0 (open) or term >= 0 (closed). Throws on mixed strict/weak atoms.
Arithmetization arithmetize(const Formula& f);
// Open/closed classification without building the term; nullopt when mixed.
bool is_atomically_open(const Formula& f);
bool is_atomically_closed(const Formula& f);

// {x' = c*f & Y d Z & 0 <= c <= 1} with c a fresh Angel control.
Game freeze_transform(const Game& diffgame);
// t := x0; {x' = b*f, t' = 1 & Y & 0 <= b <= 1 d Z}; ?Q; ?(x0 = t)^d
// A clock x0' = 1 is inserted when the game has none.
Game domain_encode(const Game& diffgame, const Formula& domain);

struct WellDefinedness {
  bool ok = true;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
};
WellDefinedness well_definedness(const Game& diffgame);

}  // namespace dhg
