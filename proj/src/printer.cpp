#include "dhg/printer.hpp"

#include "dhg/vars.hpp"

namespace dhg {

namespace {

// Term precedence: 0 sum, 1 product, 2 unary minus, 3 power, 4 primary.
int term_level(const Term& t) {
  switch (t->kind) {
    case TermKind::Const:
      if (t->value < 0) return 2;
      return is_integer(t->value) ? 4 : 3;
    case TermKind::Var:
    case TermKind::Diff:
    case TermKind::Min:
    case TermKind::Max:
    case TermKind::Sqrt: return 4;
    case TermKind::Pow: return 3;
    case TermKind::Neg: return 2;
    case TermKind::Mul:
    case TermKind::Div: return 1;
    case TermKind::Add: return 0;
  }
  return 0;
}

std::string pt(const Term& t, int ctx);

std::string pt_raw(const Term& t) {
  switch (t->kind) {
    case TermKind::Const: return to_string(t->value);
    case TermKind::Var: return to_string(t->var);
    case TermKind::Diff: return to_string(t->var) + "'";
    case TermKind::Neg:
      // a literal operand would be read back as a negative constant
      if (t->a->kind == TermKind::Const && t->a->value >= 0) return "-(" + pt_raw(t->a) + ")";
      return "-" + pt(t->a, 2);
    case TermKind::Pow: return pt(t->a, 4) + "^" + std::to_string(t->exp);
    case TermKind::Mul: return pt(t->a, 1) + " * " + pt(t->b, 2);
    case TermKind::Div: {
      std::string den = t->b->kind == TermKind::Const ? "(" + pt_raw(t->b) + ")" : pt(t->b, 2);
      return pt(t->a, 1) + " / " + den;
    }
    case TermKind::Add:
      if (t->b->kind == TermKind::Neg) return pt(t->a, 0) + " - " + pt(t->b->a, 1);
      return pt(t->a, 0) + " + " + pt(t->b, 1);
    case TermKind::Min: return "min(" + pt(t->a, 0) + ", " + pt(t->b, 0) + ")";
    case TermKind::Max: return "max(" + pt(t->a, 0) + ", " + pt(t->b, 0) + ")";
    case TermKind::Sqrt: return "sqrt(" + pt(t->a, 0) + ")";
  }
  return "?";
}

std::string pt(const Term& t, int ctx) {
  std::string s = pt_raw(t);
  return term_level(t) < ctx ? "(" + s + ")" : s;
}

// Formula precedence: 0 equiv, 1 imply, 2 or, 3 and, 4 unary, 5 primary.
int formula_level(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Cmp: return 5;
    case FormulaKind::Not:
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::Box:
    case FormulaKind::Diamond: return 4;
    case FormulaKind::And: return 3;
    case FormulaKind::Or: return 2;
    case FormulaKind::Imply: return 1;
    case FormulaKind::Equiv: return 0;
  }
  return 0;
}

std::string pf(const Formula& f, int ctx);
std::string pg(const Game& g, int ctx);

std::string pf_raw(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Cmp:
      return pt(f->lhs, 0) + " " + to_string(f->op) + " " + pt(f->rhs, 0);
    case FormulaKind::Not: return "!" + pf(f->a, 4);
    case FormulaKind::And: return pf(f->a, 3) + " & " + pf(f->b, 4);
    case FormulaKind::Or: return pf(f->a, 2) + " | " + pf(f->b, 3);
    case FormulaKind::Imply: return pf(f->a, 2) + " -> " + pf(f->b, 1);
    case FormulaKind::Equiv: return pf(f->a, 0) + " <-> " + pf(f->b, 1);
    case FormulaKind::Exists: return "exists " + to_string(f->bound) + " " + pf(f->a, 4);
    case FormulaKind::Forall: return "forall " + to_string(f->bound) + " " + pf(f->a, 4);
    case FormulaKind::Box: return "[" + pg(f->game, 0) + "] " + pf(f->a, 4);
    case FormulaKind::Diamond: return "<" + pg(f->game, 0) + "> " + pf(f->a, 4);
  }
  return "?";
}

std::string pf(const Formula& f, int ctx) {
  std::string s = pf_raw(f);
  return formula_level(f) < ctx ? "(" + s + ")" : s;
}

std::string binder(const std::vector<Var>& controls, const std::vector<Var>& states,
                   const Formula& set) {
  VarSet inferred = free_vars(set);
  for (const auto& s : states) inferred.erase(s);
  VarSet declared(controls.begin(), controls.end());
  if (inferred == declared) return pf(set, 0);
  std::string out;
  for (size_t i = 0; i < controls.size(); ++i) out += (i ? ", " : "") + to_string(controls[i]);
  return out + " : " + pf(set, 0);
}

std::string diffgame(const Game& g) {
  std::string s = "{";
  for (size_t i = 0; i < g->states.size(); ++i)
    s += (i ? ", " : "") + to_string(g->states[i]) + "' = " + pt(g->rhs[i], 0);
  if (!g->demon.empty() || !g->angel.empty()) {
    s += " &";
    if (!g->demon.empty()) s += " " + binder(g->demon, g->states, g->demon_set);
    if (!g->angel.empty()) s += " d " + binder(g->angel, g->states, g->angel_set);
  }
  return s + "}";
}

std::string test(const Formula& f, bool under_postfix) {
  if (!under_postfix && formula_level(f) == 5) return "?" + pf(f, 0);
  return "?(" + pf(f, 0) + ")";
}

// Game precedence: 0 choice, 1 sequence, 2 postfix, 3 atom.
std::string postfix_operand(const Game& g) {
  switch (g->kind) {
    case GameKind::Test: return test(g->test, true);
    case GameKind::Assign:
    case GameKind::RandomAssign: return "(" + pg(g, 0) + ")";
    default: return pg(g, 2);
  }
}

int game_level(const Game& g) {
  switch (g->kind) {
    case GameKind::Choice: return 0;
    case GameKind::Seq: return 1;
    case GameKind::Repeat:
    case GameKind::Dual: return 2;
    default: return 3;
  }
}

std::string pg_raw(const Game& g) {
  switch (g->kind) {
    case GameKind::DiffGame: return diffgame(g);
    case GameKind::Assign: return to_string(g->var) + " := " + pt(g->term, 0);
    case GameKind::RandomAssign: return to_string(g->var) + " := *";
    case GameKind::Test: return test(g->test, false);
    case GameKind::Choice: return pg(g->a, 0) + " ++ " + pg(g->b, 1);
    case GameKind::Seq: return pg(g->a, 1) + "; " + pg(g->b, 2);
    case GameKind::Repeat: return postfix_operand(g->a) + "*";
    case GameKind::Dual: return postfix_operand(g->a) + "^d";
  }
  return "?";
}

std::string pg(const Game& g, int ctx) {
  std::string s = pg_raw(g);
  return game_level(g) < ctx ? "(" + s + ")" : s;
}

}  // namespace

std::string print(const Term& t) { return pt(t, 0); }
std::string print(const Formula& f) { return pf(f, 0); }
std::string print(const Game& g) { return pg(g, 0); }

}  // namespace dhg
