#include "dhg/symbolic.hpp"

#include <algorithm>

#include "dhg/poly.hpp"
#include "dhg/shapes.hpp"
#include "dhg/vars.hpp"

namespace dhg {

Term derive_term(const Term& t) {
  switch (t->kind) {
    case TermKind::Const: return mk_const(0);
    case TermKind::Var: return mk_diff(t->var);
    case TermKind::Diff: throw DerivationError("cannot derive a differential symbol");
    case TermKind::Neg: return s_neg(derive_term(t->a));
    case TermKind::Add: return s_add(derive_term(t->a), derive_term(t->b));
    case TermKind::Mul:
      return s_add(s_mul(derive_term(t->a), t->b), s_mul(t->a, derive_term(t->b)));
    case TermKind::Pow: {
      if (t->exp == 1) return derive_term(t->a);
      Term rest = t->exp == 2 ? t->a : mk_pow(t->a, t->exp - 1);
      return s_add(s_mul(derive_term(t->a), rest), s_mul(t->a, derive_term(rest)));
    }
    case TermKind::Min:
    case TermKind::Max: throw DerivationError("min/max has no syntactic derivative");
    case TermKind::Div:
    case TermKind::Sqrt: throw DerivationError("division and sqrt are not derivable");
  }
  throw DerivationError("unknown term");
}

Term gradient_form(const Term& d) {
  Polynomial p;
  try {
    p = poly_normalize(d);
  } catch (const PolyError&) {
    return d;
  }
  VarSet dvars;
  for (const auto& [m, _] : p.terms())
    for (const auto& [ind, e] : m)
      if (ind.diff) dvars.insert(ind.var);
  Polynomial rest = p;
  Term acc;
  for (const Var& x : dvars) {
    Polynomial c;
    try {
      c = p.coefficient_of_diff(x);
    } catch (const PolyError&) {
      return p.to_term();
    }
    rest = rest - c * Polynomial::indet({x, true});
    Term piece;
    if (c.is_constant() && c.constant_value() == 1) {
      piece = mk_diff(x);
    } else if (c.is_constant() && c.constant_value() == -1) {
      piece = mk_neg(mk_diff(x));
    } else {
      piece = mk_mul(c.to_term(), mk_diff(x));
    }
    acc = acc ? mk_add(acc, piece) : piece;
  }
  if (!rest.is_zero()) acc = acc ? mk_add(acc, rest.to_term()) : rest.to_term();
  return acc ? acc : mk_const(0);
}

Formula nnf(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Cmp: return f;
    case FormulaKind::And: return mk_and(nnf(f->a), nnf(f->b));
    case FormulaKind::Or: return mk_or(nnf(f->a), nnf(f->b));
    case FormulaKind::Imply: return mk_or(nnf(mk_not(f->a)), nnf(f->b));
    case FormulaKind::Equiv:
      return mk_and(nnf(mk_imply(f->a, f->b)), nnf(mk_imply(f->b, f->a)));
    case FormulaKind::Exists: return mk_exists(f->bound, nnf(f->a));
    case FormulaKind::Forall: return mk_forall(f->bound, nnf(f->a));
    case FormulaKind::Box: return mk_box(f->game, nnf(f->a));
    case FormulaKind::Diamond: return mk_diamond(f->game, nnf(f->a));
    case FormulaKind::Not: break;
  }
  const Formula& g = f->a;
  switch (g->kind) {
    case FormulaKind::True: return mk_false();
    case FormulaKind::False: return mk_true();
    case FormulaKind::Cmp: return mk_cmp(negate(g->op), g->lhs, g->rhs);
    case FormulaKind::Not: return nnf(g->a);
    case FormulaKind::And: return mk_or(nnf(mk_not(g->a)), nnf(mk_not(g->b)));
    case FormulaKind::Or: return mk_and(nnf(mk_not(g->a)), nnf(mk_not(g->b)));
    case FormulaKind::Imply: return mk_and(nnf(g->a), nnf(mk_not(g->b)));
    case FormulaKind::Equiv:
      return mk_or(mk_and(nnf(g->a), nnf(mk_not(g->b))), mk_and(nnf(mk_not(g->a)), nnf(g->b)));
    case FormulaKind::Exists: return mk_forall(g->bound, nnf(mk_not(g->a)));
    case FormulaKind::Forall: return mk_exists(g->bound, nnf(mk_not(g->a)));
    case FormulaKind::Box: return mk_diamond(g->game, nnf(mk_not(g->a)));
    case FormulaKind::Diamond: return mk_box(g->game, nnf(mk_not(g->a)));
  }
  return f;
}

namespace {

Formula derive_nnf(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return mk_true();
    case FormulaKind::And:
    case FormulaKind::Or: return mk_and(derive_nnf(f->a), derive_nnf(f->b));
    case FormulaKind::Cmp: {
      Term l = gradient_form(derive_term(f->lhs)), r = gradient_form(derive_term(f->rhs));
      switch (f->op) {
        case CmpOp::Ge:
        case CmpOp::Gt: return mk_cmp(CmpOp::Ge, l, r);
        case CmpOp::Le:
        case CmpOp::Lt: return mk_cmp(CmpOp::Le, l, r);
        default: return mk_cmp(CmpOp::Eq, l, r);
      }
    }
    default: throw DerivationError("derivation needs a quantifier-free, modality-free formula");
  }
}

}  // namespace

Formula derive_formula(const Formula& f) { return derive_nnf(nnf(f)); }

Term fold_constants(const Term& t) {
  switch (t->kind) {
    case TermKind::Const:
    case TermKind::Var:
    case TermKind::Diff: return t;
    case TermKind::Neg: return s_neg(fold_constants(t->a));
    case TermKind::Add: {
      Term a = fold_constants(t->a), b = fold_constants(t->b);
      if (b->kind == TermKind::Neg) return s_sub(a, b->a);
      return s_add(a, b);
    }
    case TermKind::Mul: return s_mul(fold_constants(t->a), fold_constants(t->b));
    case TermKind::Pow: {
      Term a = fold_constants(t->a);
      if (a->kind == TermKind::Const) return mk_const(rational_pow(a->value, t->exp));
      return mk_pow(a, t->exp);
    }
    case TermKind::Sqrt: return mk_sqrt(fold_constants(t->a));
    default: {
      TermNode n = *t;
      n.a = fold_constants(t->a);
      n.b = fold_constants(t->b);
      return std::make_shared<const TermNode>(std::move(n));
    }
  }
}

Term lie_substitute(const Term& t, const std::map<Var, Term>& bindings) {
  return fold_constants(substitute_diff(t, bindings, true));
}

Formula lie_substitute(const Formula& f, const std::map<Var, Term>& bindings) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Cmp:
      return mk_cmp(f->op, lie_substitute(f->lhs, bindings), lie_substitute(f->rhs, bindings));
    case FormulaKind::Not: return mk_not(lie_substitute(f->a, bindings));
    case FormulaKind::And: return mk_and(lie_substitute(f->a, bindings), lie_substitute(f->b, bindings));
    case FormulaKind::Or: return mk_or(lie_substitute(f->a, bindings), lie_substitute(f->b, bindings));
    case FormulaKind::Imply:
      return mk_imply(lie_substitute(f->a, bindings), lie_substitute(f->b, bindings));
    case FormulaKind::Equiv:
      return mk_equiv(lie_substitute(f->a, bindings), lie_substitute(f->b, bindings));
    default: throw DerivationError("Lie substitution needs a quantifier-free formula");
  }
}

std::map<Var, Term> ode_bindings(const Game& g) {
  if (g->kind != GameKind::DiffGame) throw DerivationError("not a differential game");
  std::map<Var, Term> out;
  for (size_t i = 0; i < g->states.size(); ++i) out.emplace(g->states[i], g->rhs[i]);
  return out;
}

// --- arithmetization ---------------------------------------------------------

namespace {

void collect_ops(const Formula& f, bool& open, bool& closed) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return;
    case FormulaKind::Cmp:
      if (f->op == CmpOp::Gt || f->op == CmpOp::Lt || f->op == CmpOp::Ne)
        open = true;
      else
        closed = true;
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      collect_ops(f->a, open, closed);
      collect_ops(f->b, open, closed);
      return;
    default: throw ArithmetizeError("arithmetization needs a quantifier-free, modality-free formula");
  }
}

Term arith_nnf(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True: return mk_const(1);
    case FormulaKind::False: return mk_const(-1);
    case FormulaKind::And: return mk_min(arith_nnf(f->a), arith_nnf(f->b));
    case FormulaKind::Or: return mk_max(arith_nnf(f->a), arith_nnf(f->b));
    case FormulaKind::Cmp:
      switch (f->op) {
        case CmpOp::Ge:
        case CmpOp::Gt: return s_sub(f->lhs, f->rhs);
        case CmpOp::Le:
        case CmpOp::Lt: return s_sub(f->rhs, f->lhs);
        case CmpOp::Eq: return mk_min(s_sub(f->lhs, f->rhs), s_sub(f->rhs, f->lhs));
        case CmpOp::Ne: return mk_max(s_sub(f->lhs, f->rhs), s_sub(f->rhs, f->lhs));
      }
      break;
    default: break;
  }
  throw ArithmetizeError("unexpected connective");
}

}  // namespace

Arithmetization arithmetize(const Formula& f) {
  Formula g = nnf(f);
  bool open = false, closed = false;
  collect_ops(g, open, closed);
  if (open && closed) throw ArithmetizeError("formula mixes strict and weak atoms; it is neither open nor closed");
  return {arith_nnf(g), open ? ArithMode::Open : ArithMode::Closed};
}

bool is_atomically_open(const Formula& f) {
  bool open = false, closed = false;
  collect_ops(nnf(f), open, closed);
  return !closed;
}

bool is_atomically_closed(const Formula& f) {
  bool open = false, closed = false;
  collect_ops(nnf(f), open, closed);
  return !open;
}

// --- transforms ----------------------------------------------------------------

namespace {

Formula unit_interval(const Var& v) {
  return mk_and(mk_cmp(CmpOp::Le, mk_const(0), mk_var(v)), mk_cmp(CmpOp::Le, mk_var(v), mk_const(1)));
}

// Left-nested so the printer needs no parentheses.
Formula conj(const Formula& a, const Formula& b) {
  if (a->kind == FormulaKind::True) return b;
  if (b->kind == FormulaKind::And) return mk_and(conj(a, b->a), b->b);
  return mk_and(a, b);
}

void require_diffgame(const Game& g) {
  if (g->kind != GameKind::DiffGame) throw SyntaxError("expected a differential game");
}

}  // namespace

Game freeze_transform(const Game& g) {
  require_diffgame(g);
  Var c = fresh_var("c", all_vars(g));
  std::vector<Term> rhs;
  for (const auto& f : g->rhs) rhs.push_back(mk_mul(mk_var(c), f));
  std::vector<Var> angel = g->angel;
  angel.push_back(c);
  return mk_diffgame(g->states, rhs, g->demon, g->demon_set, angel, conj(g->angel_set, unit_interval(c)));
}

Game domain_encode(const Game& g, const Formula& q) {
  require_diffgame(g);
  VarSet avoid = all_vars(g);
  for (const auto& v : all_vars(q)) avoid.insert(v);
  std::vector<Var> states = g->states;
  std::vector<Term> rhs = g->rhs;
  std::optional<Var> clock;
  for (size_t i = 0; i < states.size(); ++i)
    if (is_const(rhs[i], 1)) {
      clock = states[i];
      break;
    }
  if (!clock) {
    clock = fresh_var("x", avoid);
    avoid.insert(*clock);
    states.push_back(*clock);
    rhs.push_back(mk_const(1));
  }
  Var t = fresh_var("t", avoid);
  avoid.insert(t);
  Var b = fresh_var("b", avoid);
  for (auto& f : rhs) f = mk_mul(mk_var(b), f);
  states.push_back(t);
  rhs.push_back(mk_const(1));
  std::vector<Var> demon = g->demon;
  demon.push_back(b);
  Game ode = mk_diffgame(states, rhs, demon, conj(g->demon_set, unit_interval(b)), g->angel, g->angel_set);
  Game check = mk_dual(mk_test(mk_cmp(CmpOp::Eq, mk_var(*clock), mk_var(t))));
  return mk_seq(mk_seq(mk_seq(mk_assign(t, mk_var(*clock)), ode), mk_test(q)), check);
}

WellDefinedness well_definedness(const Game& g) {
  require_diffgame(g);
  WellDefinedness out;
  for (size_t i = 0; i < g->rhs.size(); ++i) {
    if (has_witness_ops(g->rhs[i])) {
      out.ok = false;
      out.errors.push_back("right-hand side of " + to_string(g->states[i]) +
                           " uses division or sqrt; it must be polynomial (min/max allowed)");
    }
  }
  auto check = [&](const std::vector<Var>& controls, const Formula& set, const char* who) {
    if (controls.empty()) return;
    ControlShape s = analyse_controls(controls, set);
    for (const auto& w : s.warnings) out.warnings.push_back(std::string(who) + ": " + w);
    if (!s.compact) out.ok = false;
  };
  check(g->demon, g->demon_set, "demon controls");
  check(g->angel, g->angel_set, "angel controls");
  return out;
}

}  // namespace dhg
