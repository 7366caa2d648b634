#include "dhg/ast.hpp"

#include <algorithm>

namespace dhg {

std::string to_string(const Var& v) {
  if (v.index == 0) return v.name;
  return v.name + "[" + std::to_string(v.index) + "]";
}

namespace {

Term term_node(TermNode n) { return std::make_shared<const TermNode>(std::move(n)); }
Formula formula_node(FormulaNode n) { return std::make_shared<const FormulaNode>(std::move(n)); }
Game game_node(GameNode n) { return std::make_shared<const GameNode>(std::move(n)); }

template <class T>
int cmp3(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

}  // namespace

Term mk_const(const Rational& q) {
  TermNode n{TermKind::Const};
  n.value = q;
  n.value.canonicalize();
  return term_node(std::move(n));
}
Term mk_const(long v) { return mk_const(Rational(v)); }

Term mk_var(const Var& v) {
  TermNode n{TermKind::Var};
  n.var = v;
  return term_node(std::move(n));
}
Term mk_var(const std::string& name, int index) { return mk_var(Var{name, index}); }

Term mk_diff(const Var& v) {
  TermNode n{TermKind::Diff};
  n.var = v;
  return term_node(std::move(n));
}

static Term unary(TermKind k, Term a) {
  if (!a) throw SyntaxError("null operand");
  TermNode n{k};
  n.a = std::move(a);
  return term_node(std::move(n));
}
static Term binary(TermKind k, Term a, Term b) {
  if (!a || !b) throw SyntaxError("null operand");
  TermNode n{k};
  n.a = std::move(a);
  n.b = std::move(b);
  return term_node(std::move(n));
}

Term mk_neg(Term a) { return unary(TermKind::Neg, std::move(a)); }
Term mk_add(Term a, Term b) { return binary(TermKind::Add, std::move(a), std::move(b)); }
Term mk_sub(Term a, Term b) { return mk_add(std::move(a), mk_neg(std::move(b))); }
Term mk_mul(Term a, Term b) { return binary(TermKind::Mul, std::move(a), std::move(b)); }
Term mk_pow(Term a, unsigned exp) {
  if (exp < 1) throw SyntaxError("exponent must be a natural number >= 1");
  TermNode n{TermKind::Pow};
  n.a = std::move(a);
  n.exp = exp;
  return term_node(std::move(n));
}
Term mk_min(Term a, Term b) { return binary(TermKind::Min, std::move(a), std::move(b)); }
Term mk_max(Term a, Term b) { return binary(TermKind::Max, std::move(a), std::move(b)); }
Term mk_div(Term a, Term b) { return binary(TermKind::Div, std::move(a), std::move(b)); }
Term mk_sqrt(Term a) { return unary(TermKind::Sqrt, std::move(a)); }

bool is_const(const Term& t, const Rational& q) {
  return t->kind == TermKind::Const && t->value == q;
}

Term s_neg(Term a) {
  if (a->kind == TermKind::Const) return mk_const(Rational(-a->value));
  if (a->kind == TermKind::Neg) return a->a;
  return mk_neg(std::move(a));
}

Term s_add(Term a, Term b) {
  if (a->kind == TermKind::Const && b->kind == TermKind::Const)
    return mk_const(Rational(a->value + b->value));
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return mk_add(std::move(a), std::move(b));
}

Term s_sub(Term a, Term b) {
  if (a->kind == TermKind::Const && b->kind == TermKind::Const)
    return mk_const(Rational(a->value - b->value));
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return s_neg(std::move(b));
  return mk_sub(std::move(a), std::move(b));
}

Term s_mul(Term a, Term b) {
  if (a->kind == TermKind::Const && b->kind == TermKind::Const)
    return mk_const(Rational(a->value * b->value));
  if (is_const(a, 0) || is_const(b, 0)) return mk_const(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  return mk_mul(std::move(a), std::move(b));
}

// --- formulas ---------------------------------------------------------------

Formula mk_true() { return formula_node(FormulaNode{FormulaKind::True}); }
Formula mk_false() { return formula_node(FormulaNode{FormulaKind::False}); }

Formula mk_cmp(CmpOp op, Term lhs, Term rhs) {
  if (!lhs || !rhs) throw SyntaxError("null comparison operand");
  FormulaNode n{FormulaKind::Cmp};
  n.op = op;
  n.lhs = std::move(lhs);
  n.rhs = std::move(rhs);
  return formula_node(std::move(n));
}

static Formula fbin(FormulaKind k, Formula a, Formula b) {
  if (!a || !b) throw SyntaxError("null formula operand");
  FormulaNode n{k};
  n.a = std::move(a);
  n.b = std::move(b);
  return formula_node(std::move(n));
}

Formula mk_not(Formula a) {
  FormulaNode n{FormulaKind::Not};
  n.a = std::move(a);
  return formula_node(std::move(n));
}
Formula mk_and(Formula a, Formula b) { return fbin(FormulaKind::And, std::move(a), std::move(b)); }
Formula mk_or(Formula a, Formula b) { return fbin(FormulaKind::Or, std::move(a), std::move(b)); }
Formula mk_imply(Formula a, Formula b) { return fbin(FormulaKind::Imply, std::move(a), std::move(b)); }
Formula mk_equiv(Formula a, Formula b) { return fbin(FormulaKind::Equiv, std::move(a), std::move(b)); }

static Formula quant(FormulaKind k, const Var& v, Formula a) {
  FormulaNode n{k};
  n.bound = v;
  n.a = std::move(a);
  return formula_node(std::move(n));
}
Formula mk_exists(const Var& v, Formula a) { return quant(FormulaKind::Exists, v, std::move(a)); }
Formula mk_forall(const Var& v, Formula a) { return quant(FormulaKind::Forall, v, std::move(a)); }

static Formula modal(FormulaKind k, Game g, Formula a) {
  if (!g || !a) throw SyntaxError("null modality operand");
  FormulaNode n{k};
  n.game = std::move(g);
  n.a = std::move(a);
  return formula_node(std::move(n));
}
Formula mk_box(Game g, Formula a) { return modal(FormulaKind::Box, std::move(g), std::move(a)); }
Formula mk_diamond(Game g, Formula a) { return modal(FormulaKind::Diamond, std::move(g), std::move(a)); }

Formula mk_and_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return mk_true();
  Formula acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = mk_and(acc, fs[i]);
  return acc;
}
Formula mk_or_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return mk_false();
  Formula acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = mk_or(acc, fs[i]);
  return acc;
}

// --- games ------------------------------------------------------------------

Game mk_diffgame(std::vector<Var> states, std::vector<Term> rhs, std::vector<Var> demon,
                 Formula demon_set, std::vector<Var> angel, Formula angel_set) {
  if (states.empty() || states.size() != rhs.size())
    throw SyntaxError("differential game needs one right-hand side per state variable");
  VarSet seen;
  for (const auto& v : states)
    if (!seen.insert(v).second) throw SyntaxError("duplicate state variable " + to_string(v));
  if (demon.empty() && demon_set && demon_set->kind != FormulaKind::True)
    throw SyntaxError("demon constraint names no control variable (evolution domains are not supported)");
  if (angel.empty() && angel_set && angel_set->kind != FormulaKind::True)
    throw SyntaxError("angel constraint names no control variable (evolution domains are not supported)");
  std::sort(demon.begin(), demon.end());
  std::sort(angel.begin(), angel.end());
  for (const auto& v : demon)
    if (!seen.insert(v).second) throw SyntaxError("control variable clashes: " + to_string(v));
  for (const auto& v : angel)
    if (!seen.insert(v).second) throw SyntaxError("control variable clashes: " + to_string(v));
  GameNode n{GameKind::DiffGame};
  n.states = std::move(states);
  n.rhs = std::move(rhs);
  n.demon = std::move(demon);
  n.angel = std::move(angel);
  n.demon_set = demon_set ? std::move(demon_set) : mk_true();
  n.angel_set = angel_set ? std::move(angel_set) : mk_true();
  return game_node(std::move(n));
}

Game mk_assign(const Var& v, Term t) {
  GameNode n{GameKind::Assign};
  n.var = v;
  n.term = std::move(t);
  return game_node(std::move(n));
}
Game mk_random(const Var& v) {
  GameNode n{GameKind::RandomAssign};
  n.var = v;
  return game_node(std::move(n));
}
Game mk_test(Formula f) {
  GameNode n{GameKind::Test};
  n.test = std::move(f);
  return game_node(std::move(n));
}
static Game gbin(GameKind k, Game a, Game b) {
  if (!a || !b) throw SyntaxError("null game operand");
  GameNode n{k};
  n.a = std::move(a);
  n.b = std::move(b);
  return game_node(std::move(n));
}
Game mk_choice(Game a, Game b) { return gbin(GameKind::Choice, std::move(a), std::move(b)); }
Game mk_seq(Game a, Game b) { return gbin(GameKind::Seq, std::move(a), std::move(b)); }
Game mk_repeat(Game a) {
  GameNode n{GameKind::Repeat};
  n.a = std::move(a);
  return game_node(std::move(n));
}
Game mk_dual(Game a) {
  GameNode n{GameKind::Dual};
  n.a = std::move(a);
  return game_node(std::move(n));
}

// --- comparison -------------------------------------------------------------

int compare(const Term& a, const Term& b) {
  if (a.get() == b.get()) return 0;
  if (int c = cmp3(a->kind, b->kind)) return c;
  switch (a->kind) {
    case TermKind::Const: return cmp(a->value, b->value) < 0 ? -1 : (cmp(a->value, b->value) > 0 ? 1 : 0);
    case TermKind::Var:
    case TermKind::Diff: return cmp3(a->var, b->var);
    case TermKind::Pow:
      if (int c = cmp3(a->exp, b->exp)) return c;
      return compare(a->a, b->a);
    case TermKind::Neg:
    case TermKind::Sqrt: return compare(a->a, b->a);
    default:
      if (int c = compare(a->a, b->a)) return c;
      return compare(a->b, b->b);
  }
}

int compare(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return 0;
  if (int c = cmp3(a->kind, b->kind)) return c;
  switch (a->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return 0;
    case FormulaKind::Cmp:
      if (int c = cmp3(a->op, b->op)) return c;
      if (int c = compare(a->lhs, b->lhs)) return c;
      return compare(a->rhs, b->rhs);
    case FormulaKind::Not: return compare(a->a, b->a);
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      if (int c = cmp3(a->bound, b->bound)) return c;
      return compare(a->a, b->a);
    case FormulaKind::Box:
    case FormulaKind::Diamond:
      if (int c = compare(a->game, b->game)) return c;
      return compare(a->a, b->a);
    default:
      if (int c = compare(a->a, b->a)) return c;
      return compare(a->b, b->b);
  }
}

int compare(const Game& a, const Game& b) {
  if (a.get() == b.get()) return 0;
  if (int c = cmp3(a->kind, b->kind)) return c;
  switch (a->kind) {
    case GameKind::DiffGame: {
      if (int c = cmp3(a->states, b->states)) return c;
      if (int c = cmp3(a->rhs.size(), b->rhs.size())) return c;
      for (size_t i = 0; i < a->rhs.size(); ++i)
        if (int c = compare(a->rhs[i], b->rhs[i])) return c;
      if (int c = cmp3(a->demon, b->demon)) return c;
      if (int c = cmp3(a->angel, b->angel)) return c;
      if (int c = compare(a->demon_set, b->demon_set)) return c;
      return compare(a->angel_set, b->angel_set);
    }
    case GameKind::Assign:
      if (int c = cmp3(a->var, b->var)) return c;
      return compare(a->term, b->term);
    case GameKind::RandomAssign: return cmp3(a->var, b->var);
    case GameKind::Test: return compare(a->test, b->test);
    case GameKind::Repeat:
    case GameKind::Dual: return compare(a->a, b->a);
    default:
      if (int c = compare(a->a, b->a)) return c;
      return compare(a->b, b->b);
  }
}

// --- queries ----------------------------------------------------------------

static bool any_term(const Term& t, bool (*pred)(const TermNode&)) {
  if (!t) return false;
  if (pred(*t)) return true;
  return any_term(t->a, pred) || any_term(t->b, pred);
}

bool has_witness_ops(const Term& t) {
  return any_term(t, [](const TermNode& n) {
    return n.kind == TermKind::Div || n.kind == TermKind::Sqrt;
  });
}
bool has_minmax(const Term& t) {
  return any_term(t, [](const TermNode& n) {
    return n.kind == TermKind::Min || n.kind == TermKind::Max;
  });
}
bool has_diff(const Term& t) {
  return any_term(t, [](const TermNode& n) { return n.kind == TermKind::Diff; });
}
bool is_polynomial(const Term& t) {
  return !any_term(t, [](const TermNode& n) {
    return n.kind == TermKind::Min || n.kind == TermKind::Max || n.kind == TermKind::Div ||
           n.kind == TermKind::Sqrt;
  });
}

static bool any_atom(const Formula& f, bool (*pred)(const Term&)) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return false;
    case FormulaKind::Cmp: return pred(f->lhs) || pred(f->rhs);
    case FormulaKind::Not:
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::Box:
    case FormulaKind::Diamond: return any_atom(f->a, pred);
    default: return any_atom(f->a, pred) || any_atom(f->b, pred);
  }
}

bool has_diff(const Formula& f) { return any_atom(f, [](const Term& t) { return has_diff(t); }); }
bool has_witness_ops(const Formula& f) {
  return any_atom(f, [](const Term& t) { return has_witness_ops(t); });
}

bool is_first_order(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Box:
    case FormulaKind::Diamond: return false;
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Cmp: return true;
    case FormulaKind::Not:
    case FormulaKind::Exists:
    case FormulaKind::Forall: return is_first_order(f->a);
    default: return is_first_order(f->a) && is_first_order(f->b);
  }
}

bool is_quantifier_free(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::Box:
    case FormulaKind::Diamond: return false;
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Cmp: return true;
    case FormulaKind::Not: return is_quantifier_free(f->a);
    default: return is_quantifier_free(f->a) && is_quantifier_free(f->b);
  }
}

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::Ge: return CmpOp::Le;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Lt: return CmpOp::Gt;
    default: return op;
  }
}

CmpOp negate(CmpOp op) {
  switch (op) {
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
  }
  return op;
}

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
    case CmpOp::Eq: return "=";
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

}  // namespace dhg
