#pragma once
// Immutable, shared syntax trees for terms, formulas and hybrid games.

#include <compare>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhg/rational.hpp"

namespace dhg {

// Scalar variable; index > 0 marks a component of a vector variable.
struct Var {
  std::string name;
  int index = 0;
  auto operator<=>(const Var&) const = default;
  bool operator==(const Var&) const = default;
};
std::string to_string(const Var& v);

using VarSet = std::set<Var>;

struct TermNode;
struct FormulaNode;
struct GameNode;
using Term = std::shared_ptr<const TermNode>;
using Formula = std::shared_ptr<const FormulaNode>;
using Game = std::shared_ptr<const GameNode>;

enum class TermKind { Const, Var, Diff, Neg, Add, Mul, Pow, Min, Max, Div, Sqrt };

struct TermNode {
  TermKind kind;
  Rational value;    // Const
  Var var;           // Var, Diff
  unsigned exp = 0;  // Pow, >= 1
  Term a, b;
};

enum class CmpOp { Ge, Gt, Eq, Le, Lt, Ne };

enum class FormulaKind {
  True, False, Cmp, Not, And, Or, Imply, Equiv, Exists, Forall, Box, Diamond
};

struct FormulaNode {
  FormulaKind kind;
  CmpOp op = CmpOp::Ge;  // Cmp
  Term lhs, rhs;         // Cmp
  Formula a, b;          // connectives; quantifier and modal body in a
  Var bound;             // Exists, Forall
  Game game;             // Box, Diamond
};

enum class GameKind { DiffGame, Assign, RandomAssign, Test, Choice, Seq, Repeat, Dual };

struct GameNode {
  GameKind kind;
  Var var;        // Assign, RandomAssign
  Term term;      // Assign
  Formula test;   // Test
  Game a, b;      // Choice, Seq, Repeat, Dual
  // DiffGame: states[i]' = rhs[i]; demon controls constrained by demon_set,
  // angel controls by angel_set. Control lists are kept sorted.
  std::vector<Var> states;
  std::vector<Term> rhs;
  std::vector<Var> demon, angel;
  Formula demon_set, angel_set;
};

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- term constructors ------------------------------------------------------
Term mk_const(const Rational& q);
Term mk_const(long n);
Term mk_var(const Var& v);
Term mk_var(const std::string& name, int index = 0);
Term mk_diff(const Var& v);
Term mk_neg(Term a);
Term mk_add(Term a, Term b);
Term mk_sub(Term a, Term b);  // a + (-b)
Term mk_mul(Term a, Term b);
Term mk_pow(Term a, unsigned exp);
Term mk_min(Term a, Term b);
Term mk_max(Term a, Term b);
Term mk_div(Term a, Term b);
Term mk_sqrt(Term a);

// Constant-folding variants used when building derived syntax.
Term s_add(Term a, Term b);
Term s_sub(Term a, Term b);
Term s_mul(Term a, Term b);
Term s_neg(Term a);

bool is_const(const Term& t, const Rational& q);

// --- formula constructors ---------------------------------------------------
Formula mk_true();
Formula mk_false();
Formula mk_cmp(CmpOp op, Term lhs, Term rhs);
Formula mk_not(Formula a);
Formula mk_and(Formula a, Formula b);
Formula mk_or(Formula a, Formula b);
Formula mk_imply(Formula a, Formula b);
Formula mk_equiv(Formula a, Formula b);
Formula mk_exists(const Var& v, Formula a);
Formula mk_forall(const Var& v, Formula a);
Formula mk_box(Game g, Formula a);
Formula mk_diamond(Game g, Formula a);
Formula mk_and_all(const std::vector<Formula>& fs);  // true when empty
Formula mk_or_all(const std::vector<Formula>& fs);   // false when empty

// --- game constructors ------------------------------------------------------
Game mk_diffgame(std::vector<Var> states, std::vector<Term> rhs, std::vector<Var> demon,
                 Formula demon_set, std::vector<Var> angel, Formula angel_set);
Game mk_assign(const Var& v, Term t);
Game mk_random(const Var& v);
Game mk_test(Formula f);
Game mk_choice(Game a, Game b);
Game mk_seq(Game a, Game b);
Game mk_repeat(Game a);
Game mk_dual(Game a);

// --- structural comparison --------------------------------------------------
int compare(const Term& a, const Term& b);
int compare(const Formula& a, const Formula& b);
int compare(const Game& a, const Game& b);
inline bool equal(const Term& a, const Term& b) { return compare(a, b) == 0; }
inline bool equal(const Formula& a, const Formula& b) { return compare(a, b) == 0; }
inline bool equal(const Game& a, const Game& b) { return compare(a, b) == 0; }

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare(a, b) < 0; }
};

// --- queries ----------------------------------------------------------------
bool has_witness_ops(const Term& t);  // Div or Sqrt anywhere
bool has_minmax(const Term& t);
bool has_diff(const Term& t);
bool has_diff(const Formula& f);
bool has_witness_ops(const Formula& f);
bool is_first_order(const Formula& f);  // no modalities
bool is_quantifier_free(const Formula& f);
bool is_polynomial(const Term& t);      // no min/max/div/sqrt

CmpOp flip(CmpOp op);    // a op b  <=>  b flip(op) a
CmpOp negate(CmpOp op);  // !(a op b) <=> a negate(op) b
const char* to_string(CmpOp op);

}  // namespace dhg
