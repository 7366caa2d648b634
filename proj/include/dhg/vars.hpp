#pragma once
// Free/bound variable analysis and capture-avoiding substitution.

#include <map>

#include "dhg/ast.hpp"

namespace dhg {

VarSet free_vars(const Term& t);
VarSet free_vars(const Formula& f);
VarSet free_vars(const Game& g);

// Variables a game may write (a differential game binds its states and controls).
VarSet bound_vars(const Game& g);
// Variables written on every play of the game.
VarSet must_bound_vars(const Game& g);

// Variables whose differential symbols occur.
VarSet diff_vars(const Term& t);

// Replace free occurrences of x by theta. Throws SubstitutionError when a binder
// would capture a variable of theta or when x is only possibly bound.
class SubstitutionError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

Term substitute(const Term& t, const Var& x, const Term& theta);
Formula substitute(const Formula& f, const Var& x, const Term& theta);
Game substitute(const Game& g, const Var& x, const Term& theta);

// Simultaneous substitution into a term (no binders inside terms).
Term substitute(const Term& t, const std::map<Var, Term>& sigma);
// Simultaneous substitution into a quantifier-free/first-order formula; the
// same admissibility rules apply per variable.
Formula substitute(const Formula& f, const std::map<Var, Term>& sigma);

// Replace differential symbols x' by sigma[x].
Term substitute_diff(const Term& t, const std::map<Var, Term>& sigma, bool others_to_zero);

// Rename every occurrence (free and bound) of x to y.
Formula rename_all(const Formula& f, const Var& x, const Var& y);
Game rename_all(const Game& g, const Var& x, const Var& y);
Term rename_all(const Term& t, const Var& x, const Var& y);

// Fresh name "$<stem><k>" not in avoid.
Var fresh_var(const std::string& stem, const VarSet& avoid);

// All variables occurring anywhere (free or bound).
VarSet all_vars(const Formula& f);
VarSet all_vars(const Game& g);

}  // namespace dhg
