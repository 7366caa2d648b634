#include "dhg/vars.hpp"

#include <algorithm>

namespace dhg {

namespace {

void collect(const Term& t, VarSet& out) {
  if (!t) return;
  if (t->kind == TermKind::Var) out.insert(t->var);
  collect(t->a, out);
  collect(t->b, out);
}

void collect_diff(const Term& t, VarSet& out) {
  if (!t) return;
  if (t->kind == TermKind::Diff) out.insert(t->var);
  collect_diff(t->a, out);
  collect_diff(t->b, out);
}

VarSet minus(VarSet a, const VarSet& b) {
  for (const auto& v : b) a.erase(v);
  return a;
}

VarSet unite(VarSet a, const VarSet& b) {
  a.insert(b.begin(), b.end());
  return a;
}

VarSet intersect(const VarSet& a, const VarSet& b) {
  VarSet out;
  for (const auto& v : a)
    if (b.count(v)) out.insert(v);
  return out;
}

bool meets(const VarSet& a, const VarSet& b) {
  for (const auto& v : a)
    if (b.count(v)) return true;
  return false;
}

}  // namespace

VarSet free_vars(const Term& t) {
  VarSet out;
  collect(t, out);
  return out;
}

VarSet diff_vars(const Term& t) {
  VarSet out;
  collect_diff(t, out);
  return out;
}

VarSet free_vars(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return {};
    case FormulaKind::Cmp: return unite(free_vars(f->lhs), free_vars(f->rhs));
    case FormulaKind::Not: return free_vars(f->a);
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      VarSet s = free_vars(f->a);
      s.erase(f->bound);
      return s;
    }
    case FormulaKind::Box:
    case FormulaKind::Diamond:
      return unite(free_vars(f->game), minus(free_vars(f->a), must_bound_vars(f->game)));
    default: return unite(free_vars(f->a), free_vars(f->b));
  }
}

VarSet free_vars(const Game& g) {
  switch (g->kind) {
    case GameKind::DiffGame: {
      VarSet s(g->states.begin(), g->states.end());
      for (const auto& r : g->rhs) s = unite(s, free_vars(r));
      s = unite(s, free_vars(g->demon_set));
      s = unite(s, free_vars(g->angel_set));
      for (const auto& v : g->demon) s.erase(v);
      for (const auto& v : g->angel) s.erase(v);
      return s;
    }
    case GameKind::Assign: return free_vars(g->term);
    case GameKind::RandomAssign: return {};
    case GameKind::Test: return free_vars(g->test);
    case GameKind::Choice: return unite(free_vars(g->a), free_vars(g->b));
    case GameKind::Seq:
      return unite(free_vars(g->a), minus(free_vars(g->b), must_bound_vars(g->a)));
    case GameKind::Repeat:
    case GameKind::Dual: return free_vars(g->a);
  }
  return {};
}

VarSet bound_vars(const Game& g) {
  switch (g->kind) {
    case GameKind::DiffGame: {
      VarSet s(g->states.begin(), g->states.end());
      s.insert(g->demon.begin(), g->demon.end());
      s.insert(g->angel.begin(), g->angel.end());
      return s;
    }
    case GameKind::Assign:
    case GameKind::RandomAssign: return {g->var};
    case GameKind::Test: return {};
    case GameKind::Choice:
    case GameKind::Seq: return unite(bound_vars(g->a), bound_vars(g->b));
    case GameKind::Repeat:
    case GameKind::Dual: return bound_vars(g->a);
  }
  return {};
}

VarSet must_bound_vars(const Game& g) {
  switch (g->kind) {
    case GameKind::DiffGame: return VarSet(g->states.begin(), g->states.end());
    case GameKind::Assign:
    case GameKind::RandomAssign: return {g->var};
    case GameKind::Test: return {};
    case GameKind::Choice: return intersect(must_bound_vars(g->a), must_bound_vars(g->b));
    case GameKind::Seq: return unite(must_bound_vars(g->a), must_bound_vars(g->b));
    case GameKind::Repeat: return {};
    case GameKind::Dual: return must_bound_vars(g->a);
  }
  return {};
}

// --- substitution -------------------------------------------------------------

Term substitute(const Term& t, const std::map<Var, Term>& sigma) {
  switch (t->kind) {
    case TermKind::Const:
    case TermKind::Diff: return t;
    case TermKind::Var: {
      auto it = sigma.find(t->var);
      return it == sigma.end() ? t : it->second;
    }
    case TermKind::Neg: return mk_neg(substitute(t->a, sigma));
    case TermKind::Sqrt: return mk_sqrt(substitute(t->a, sigma));
    case TermKind::Pow: return mk_pow(substitute(t->a, sigma), t->exp);
    default: {
      TermNode n = *t;
      n.a = substitute(t->a, sigma);
      n.b = substitute(t->b, sigma);
      return std::make_shared<const TermNode>(std::move(n));
    }
  }
}

Term substitute(const Term& t, const Var& x, const Term& theta) {
  return substitute(t, std::map<Var, Term>{{x, theta}});
}

Term substitute_diff(const Term& t, const std::map<Var, Term>& sigma, bool others_to_zero) {
  switch (t->kind) {
    case TermKind::Const:
    case TermKind::Var: return t;
    case TermKind::Diff: {
      auto it = sigma.find(t->var);
      if (it != sigma.end()) return it->second;
      return others_to_zero ? mk_const(0) : t;
    }
    case TermKind::Neg: return mk_neg(substitute_diff(t->a, sigma, others_to_zero));
    case TermKind::Sqrt: return mk_sqrt(substitute_diff(t->a, sigma, others_to_zero));
    case TermKind::Pow: return mk_pow(substitute_diff(t->a, sigma, others_to_zero), t->exp);
    default: {
      TermNode n = *t;
      n.a = substitute_diff(t->a, sigma, others_to_zero);
      n.b = substitute_diff(t->b, sigma, others_to_zero);
      return std::make_shared<const TermNode>(std::move(n));
    }
  }
}

namespace {

// Simultaneous substitution with admissibility checks. `theta_vars` is the
// union of free variables of all replacement terms.
struct Subst {
  std::map<Var, Term> sigma;
  VarSet theta_vars;

  bool touches(const VarSet& fv) const {
    for (const auto& [x, _] : sigma)
      if (fv.count(x)) return true;
    return false;
  }

  Subst without(const VarSet& vs) const {
    Subst s;
    s.theta_vars = theta_vars;
    for (const auto& [x, t] : sigma)
      if (!vs.count(x)) s.sigma.emplace(x, t);
    return s;
  }

  Term term(const Term& t) const { return substitute(t, sigma); }

  Formula formula(const Formula& f) const {
    if (!touches(free_vars(f))) return f;
    switch (f->kind) {
      case FormulaKind::True:
      case FormulaKind::False: return f;
      case FormulaKind::Cmp: return mk_cmp(f->op, term(f->lhs), term(f->rhs));
      case FormulaKind::Not: return mk_not(formula(f->a));
      case FormulaKind::And: return mk_and(formula(f->a), formula(f->b));
      case FormulaKind::Or: return mk_or(formula(f->a), formula(f->b));
      case FormulaKind::Imply: return mk_imply(formula(f->a), formula(f->b));
      case FormulaKind::Equiv: return mk_equiv(formula(f->a), formula(f->b));
      case FormulaKind::Exists:
      case FormulaKind::Forall: {
        Subst inner = without({f->bound});
        if (!inner.touches(free_vars(f->a))) return f;
        if (theta_vars.count(f->bound))
          throw SubstitutionError("substitution would capture " + to_string(f->bound) +
                                  " under a quantifier");
        Formula body = inner.formula(f->a);
        return f->kind == FormulaKind::Exists ? mk_exists(f->bound, body)
                                              : mk_forall(f->bound, body);
      }
      case FormulaKind::Box:
      case FormulaKind::Diamond: {
        Game g2 = game(f->game);
        Formula post = post_formula(f->game, f->a);
        return f->kind == FormulaKind::Box ? mk_box(g2, post) : mk_diamond(g2, post);
      }
    }
    return f;
  }

  // Substitution into the formula following game g.
  Formula post_formula(const Game& g, const Formula& post) const {
    VarSet bv = bound_vars(g), mbv = must_bound_vars(g);
    VarSet fv = free_vars(post);
    Subst rest = without(mbv);
    if (!rest.touches(fv)) return post;
    for (const auto& [x, _] : rest.sigma)
      if (fv.count(x) && bv.count(x))
        throw SubstitutionError("variable " + to_string(x) + " is possibly bound by the game");
    if (meets(bv, theta_vars))
      throw SubstitutionError("substitution would capture a variable bound by the game");
    return rest.formula(post);
  }

  Game game(const Game& g) const {
    if (!touches(free_vars(g))) return g;
    switch (g->kind) {
      case GameKind::Assign: return mk_assign(g->var, term(g->term));
      case GameKind::RandomAssign: return g;
      case GameKind::Test: return mk_test(formula(g->test));
      case GameKind::Choice: return mk_choice(game(g->a), game(g->b));
      case GameKind::Dual: return mk_dual(game(g->a));
      case GameKind::Seq: {
        Game a = game(g->a);
        VarSet bv = bound_vars(g->a), mbv = must_bound_vars(g->a);
        Subst rest = without(mbv);
        VarSet fvb = free_vars(g->b);
        if (!rest.touches(fvb)) return mk_seq(a, g->b);
        for (const auto& [x, _] : rest.sigma)
          if (fvb.count(x) && bv.count(x))
            throw SubstitutionError("variable " + to_string(x) + " is possibly bound in sequence");
        if (meets(bv, theta_vars))
          throw SubstitutionError("substitution would capture a variable bound in sequence");
        return mk_seq(a, rest.game(g->b));
      }
      case GameKind::Repeat: {
        VarSet bv = bound_vars(g->a);
        for (const auto& [x, _] : sigma)
          if (bv.count(x))
            throw SubstitutionError("variable " + to_string(x) + " is rebound inside a loop");
        if (meets(bv, theta_vars))
          throw SubstitutionError("substitution would be captured by a loop");
        return mk_repeat(game(g->a));
      }
      case GameKind::DiffGame: {
        VarSet bv = bound_vars(g);
        for (const auto& [x, _] : sigma)
          if (std::find(g->states.begin(), g->states.end(), x) != g->states.end())
            throw SubstitutionError("cannot substitute the evolving variable " + to_string(x));
        if (meets(bv, theta_vars))
          throw SubstitutionError("substitution would be captured by a differential game");
        std::vector<Term> rhs;
        for (const auto& r : g->rhs) rhs.push_back(term(r));
        return mk_diffgame(g->states, rhs, g->demon, formula(g->demon_set), g->angel,
                           formula(g->angel_set));
      }
    }
    return g;
  }
};

Subst make_subst(const std::map<Var, Term>& sigma) {
  Subst s;
  s.sigma = sigma;
  for (const auto& [_, t] : sigma) {
    VarSet fv = free_vars(t);
    s.theta_vars.insert(fv.begin(), fv.end());
  }
  return s;
}

}  // namespace

Formula substitute(const Formula& f, const std::map<Var, Term>& sigma) {
  return make_subst(sigma).formula(f);
}

Formula substitute(const Formula& f, const Var& x, const Term& theta) {
  return substitute(f, std::map<Var, Term>{{x, theta}});
}

Game substitute(const Game& g, const Var& x, const Term& theta) {
  return make_subst({{x, theta}}).game(g);
}

// --- renaming -------------------------------------------------------------------

Term rename_all(const Term& t, const Var& x, const Var& y) {
  switch (t->kind) {
    case TermKind::Const: return t;
    case TermKind::Var: return t->var == x ? mk_var(y) : t;
    case TermKind::Diff: return t->var == x ? mk_diff(y) : t;
    case TermKind::Neg: return mk_neg(rename_all(t->a, x, y));
    case TermKind::Sqrt: return mk_sqrt(rename_all(t->a, x, y));
    case TermKind::Pow: return mk_pow(rename_all(t->a, x, y), t->exp);
    default: {
      TermNode n = *t;
      n.a = rename_all(t->a, x, y);
      n.b = rename_all(t->b, x, y);
      return std::make_shared<const TermNode>(std::move(n));
    }
  }
}

Formula rename_all(const Formula& f, const Var& x, const Var& y) {
  auto r = [&](const Formula& g) { return rename_all(g, x, y); };
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Cmp: return mk_cmp(f->op, rename_all(f->lhs, x, y), rename_all(f->rhs, x, y));
    case FormulaKind::Not: return mk_not(r(f->a));
    case FormulaKind::And: return mk_and(r(f->a), r(f->b));
    case FormulaKind::Or: return mk_or(r(f->a), r(f->b));
    case FormulaKind::Imply: return mk_imply(r(f->a), r(f->b));
    case FormulaKind::Equiv: return mk_equiv(r(f->a), r(f->b));
    case FormulaKind::Exists: return mk_exists(f->bound == x ? y : f->bound, r(f->a));
    case FormulaKind::Forall: return mk_forall(f->bound == x ? y : f->bound, r(f->a));
    case FormulaKind::Box: return mk_box(rename_all(f->game, x, y), r(f->a));
    case FormulaKind::Diamond: return mk_diamond(rename_all(f->game, x, y), r(f->a));
  }
  return f;
}

Game rename_all(const Game& g, const Var& x, const Var& y) {
  auto rv = [&](const Var& v) { return v == x ? y : v; };
  switch (g->kind) {
    case GameKind::DiffGame: {
      std::vector<Var> st, de, an;
      std::vector<Term> rhs;
      for (const auto& v : g->states) st.push_back(rv(v));
      for (const auto& v : g->demon) de.push_back(rv(v));
      for (const auto& v : g->angel) an.push_back(rv(v));
      for (const auto& t : g->rhs) rhs.push_back(rename_all(t, x, y));
      return mk_diffgame(st, rhs, de, rename_all(g->demon_set, x, y), an,
                         rename_all(g->angel_set, x, y));
    }
    case GameKind::Assign: return mk_assign(rv(g->var), rename_all(g->term, x, y));
    case GameKind::RandomAssign: return mk_random(rv(g->var));
    case GameKind::Test: return mk_test(rename_all(g->test, x, y));
    case GameKind::Choice: return mk_choice(rename_all(g->a, x, y), rename_all(g->b, x, y));
    case GameKind::Seq: return mk_seq(rename_all(g->a, x, y), rename_all(g->b, x, y));
    case GameKind::Repeat: return mk_repeat(rename_all(g->a, x, y));
    case GameKind::Dual: return mk_dual(rename_all(g->a, x, y));
  }
  return g;
}

Var fresh_var(const std::string& stem, const VarSet& avoid) {
  for (int k = 0;; ++k) {
    Var v{"$" + stem + std::to_string(k), 0};
    bool clash = false;
    for (const auto& a : avoid)
      if (a.name == v.name) clash = true;
    if (!clash) return v;
  }
}

VarSet all_vars(const Formula& f) {
  VarSet out;
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: break;
    case FormulaKind::Cmp:
      collect(f->lhs, out);
      collect(f->rhs, out);
      collect_diff(f->lhs, out);
      collect_diff(f->rhs, out);
      break;
    case FormulaKind::Not: out = all_vars(f->a); break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      out = all_vars(f->a);
      out.insert(f->bound);
      break;
    case FormulaKind::Box:
    case FormulaKind::Diamond: out = unite(all_vars(f->game), all_vars(f->a)); break;
    default: out = unite(all_vars(f->a), all_vars(f->b));
  }
  return out;
}

VarSet all_vars(const Game& g) {
  VarSet out;
  switch (g->kind) {
    case GameKind::DiffGame:
      out = bound_vars(g);
      for (const auto& t : g->rhs) collect(t, out);
      out = unite(out, all_vars(g->demon_set));
      out = unite(out, all_vars(g->angel_set));
      break;
    case GameKind::Assign:
      out.insert(g->var);
      collect(g->term, out);
      break;
    case GameKind::RandomAssign: out.insert(g->var); break;
    case GameKind::Test: out = all_vars(g->test); break;
    case GameKind::Choice:
    case GameKind::Seq: out = unite(all_vars(g->a), all_vars(g->b)); break;
    default: out = all_vars(g->a);
  }
  return out;
}

}  // namespace dhg
