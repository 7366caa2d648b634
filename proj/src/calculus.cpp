#include "dhg/calculus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "dhg/poly.hpp"
#include "dhg/printer.hpp"
#include "dhg/symbolic.hpp"
#include "dhg/vars.hpp"

namespace dhg {

namespace {

void flatten_and(const Formula& f, std::vector<Formula>& out) {
  if (f->kind == FormulaKind::And) {
    flatten_and(f->a, out);
    flatten_and(f->b, out);
  } else if (f->kind != FormulaKind::True) {
    out.push_back(f);
  }
}

bool contains(const std::vector<Formula>& fs, const Formula& f) {
  return std::any_of(fs.begin(), fs.end(), [&](const Formula& g) { return equal(g, f); });
}

bool intersects(const VarSet& a, const VarSet& b) {
  for (const Var& v : a)
    if (b.count(v)) return true;
  return false;
}

// First-order assumptions whose free variables the game cannot change.
std::vector<Formula> constant_context(const Goal& g, const VarSet& bound) {
  std::vector<Formula> out;
  for (const auto& a : g.assumptions)
    if (is_first_order(a) && !intersects(free_vars(a), bound)) out.push_back(a);
  return out;
}

Formula imply(const Formula& h, const Formula& body) {
  if (h->kind == FormulaKind::True) return body;
  return mk_imply(h, body);
}

Goal sub(const Goal& g, const std::string& label, const Formula& f) {
  Goal out;
  out.assumptions = g.assumptions;
  out.formula = f;
  out.path = g.path + "/" + label;
  return out;
}

Goal sub_with(const std::vector<Formula>& ctx, const Goal& g, const std::string& label, const Formula& f) {
  Goal out;
  for (const auto& a : ctx) add_assumption(out, a);
  out.formula = f;
  out.path = g.path + "/" + label;
  return out;
}

Formula negated(const Formula& f) { return f->kind == FormulaKind::Not ? f->a : mk_not(f); }

bool is_modal(const Formula& f) { return f->kind == FormulaKind::Box || f->kind == FormulaKind::Diamond; }

Formula modal(bool box, const Game& g, const Formula& f) { return box ? mk_box(g, f) : mk_diamond(g, f); }

const Formula& expect_modal(const Goal& goal, GameKind k, const char* rule) {
  const Formula& f = goal.formula;
  if (!is_modal(f) || f->game->kind != k)
    throw RuleError(std::string(rule) + " does not match the goal " + print(f));
  return f;
}

Formula controls_constraint(const std::vector<Var>& controls, const Formula& set) {
  return controls.empty() ? mk_true() : set;
}

Formula forall_block(const std::vector<Var>& vs, const Formula& set, const Formula& body) {
  if (vs.empty()) return body;
  Formula f = imply(set, body);
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = mk_forall(*it, f);
  return f;
}

Formula exists_block(const std::vector<Var>& vs, const Formula& set, const Formula& body) {
  if (vs.empty()) return body;
  Formula f = set->kind == FormulaKind::True ? body : mk_and(set, body);
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = mk_exists(*it, f);
  return f;
}

void collect_witness_defs(const Term& t, std::vector<Formula>& out) {
  if (!t) return;
  collect_witness_defs(t->a, out);
  collect_witness_defs(t->b, out);
  if (t->kind == TermKind::Div) {
    Formula f = mk_cmp(CmpOp::Ne, t->b, mk_const(0));
    if (!contains(out, f)) out.push_back(f);
  } else if (t->kind == TermKind::Sqrt) {
    Formula f = mk_cmp(CmpOp::Ge, t->a, mk_const(0));
    if (!contains(out, f)) out.push_back(f);
  }
}

SideCondition forall_side(const std::string& name, const std::string& what, const Formula& hyp,
                          const std::vector<Var>& controls, const Formula& set, const Formula& body) {
  SideCondition c;
  c.name = name;
  c.what = what;
  c.controls = controls;
  c.control_set = controls_constraint(controls, set);
  c.matrix = imply(hyp, imply(c.control_set, body));
  c.statement = c.matrix;
  c.exists_domain = mk_true();
  return c;
}

void check_quantifier_free(const Formula& f, const char* what) {
  if (!is_first_order(f) || !is_quantifier_free(f))
    throw RuleError(std::string(what) + " must be quantifier-free and modality-free: " + print(f));
}

std::map<Var, Term> witness_map(const std::vector<std::pair<Var, Term>>& w) {
  std::map<Var, Term> out;
  for (const auto& [v, t] : w) {
    if (out.count(v)) throw RuleError("witness for " + to_string(v) + " given twice");
    out[v] = t;
  }
  return out;
}

void check_witness_targets(const std::map<Var, Term>& w, const std::vector<Var>& controls, const char* who) {
  for (const auto& [v, _] : w)
    if (std::find(controls.begin(), controls.end(), v) == controls.end())
      throw RuleError("witness target " + to_string(v) + " is not a " + who + " control");
  for (const Var& v : controls)
    if (!w.count(v)) throw RuleError("missing witness for " + std::string(who) + " control " + to_string(v));
}

void check_witness_vars(const std::map<Var, Term>& w, const VarSet& forbidden, const std::string& why) {
  for (const auto& [v, t] : w)
    for (const Var& u : free_vars(t))
      if (forbidden.count(u))
        throw RuleError("witness for " + to_string(v) + " may not mention " + to_string(u) + " (" + why + ")");
}

Formula witness_defs(const std::map<Var, Term>& w) {
  std::vector<Formula> defs;
  for (const auto& [_, t] : w) collect_witness_defs(t, defs);
  return mk_and_all(defs);
}

void require_well_defined(const Game& g, RuleResult& rr) {
  WellDefinedness wd = well_definedness(g);
  std::string msg;
  for (const auto& e : wd.errors) msg += (msg.empty() ? "" : "; ") + e;
  for (const auto& w : wd.warnings) msg += (msg.empty() ? "" : "; ") + w;
  if (!wd.ok) throw RuleError("differential game is not well-defined: " + msg);
  for (const auto& w : wd.warnings) rr.notes.push_back("well-definedness: " + w);
}

Term lie_of(const Term& t, const Game& g) { return lie_substitute(gradient_form(derive_term(t)), ode_bindings(g)); }

// --- propositional tautology check -------------------------------------------------

struct PropAtoms {
  std::vector<Formula> atoms;
  int index(const Formula& f) {
    for (size_t i = 0; i < atoms.size(); ++i)
      if (equal(atoms[i], f)) return static_cast<int>(i);
    atoms.push_back(f);
    return static_cast<int>(atoms.size() - 1);
  }
  void collect(const Formula& f) {
    switch (f->kind) {
      case FormulaKind::True:
      case FormulaKind::False: return;
      case FormulaKind::Not: collect(f->a); return;
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Imply:
      case FormulaKind::Equiv:
        collect(f->a);
        collect(f->b);
        return;
      default: index(f);
    }
  }
  bool eval(const Formula& f, unsigned long mask) {
    switch (f->kind) {
      case FormulaKind::True: return true;
      case FormulaKind::False: return false;
      case FormulaKind::Not: return !eval(f->a, mask);
      case FormulaKind::And: return eval(f->a, mask) && eval(f->b, mask);
      case FormulaKind::Or: return eval(f->a, mask) || eval(f->b, mask);
      case FormulaKind::Imply: return !eval(f->a, mask) || eval(f->b, mask);
      case FormulaKind::Equiv: return eval(f->a, mask) == eval(f->b, mask);
      default: return (mask >> index(f)) & 1;
    }
  }
};

bool tautology(const Formula& f) {
  PropAtoms p;
  p.collect(f);
  if (p.atoms.size() > 20) throw RuleError("too many atoms for a propositional check");
  for (unsigned long m = 0; m < (1ul << p.atoms.size()); ++m)
    if (!p.eval(f, m)) return false;
  return true;
}

// --- rules ---------------------------------------------------------------------------

using RuleFn = std::function<RuleResult(const Goal&, const RuleApplication&, const std::string&)>;

RuleResult one(const Goal& g, const Formula& f, const std::string& label = "main") {
  RuleResult r;
  r.subgoals.push_back({label, sub(g, label, f)});
  return r;
}

RuleResult rule_implyR(const Goal& g, const RuleApplication&, const std::string&) {
  if (g.formula->kind != FormulaKind::Imply) throw RuleError("implyR needs an implication, got " + print(g.formula));
  RuleResult r = one(g, g.formula->b);
  add_assumption(r.subgoals[0].second, g.formula->a);
  return r;
}

RuleResult rule_andR(const Goal& g, const RuleApplication&, const std::string&) {
  if (g.formula->kind != FormulaKind::And) throw RuleError("andR needs a conjunction, got " + print(g.formula));
  RuleResult r;
  r.subgoals.push_back({"left", sub(g, "left", g.formula->a)});
  r.subgoals.push_back({"right", sub(g, "right", g.formula->b)});
  return r;
}

RuleResult rule_orL(const Goal& g, const RuleApplication& app, const std::string&) {
  int pick = -1;
  for (size_t i = 0; i < g.assumptions.size(); ++i) {
    const Formula& a = g.assumptions[i];
    if (a->kind != FormulaKind::Or) continue;
    if (app.formula && !equal(a, app.formula)) continue;
    pick = static_cast<int>(i);
    break;
  }
  if (pick < 0) throw RuleError("orL finds no matching disjunction among the assumptions");
  Formula d = g.assumptions[pick];
  RuleResult r;
  for (int side = 0; side < 2; ++side) {
    std::string label = side == 0 ? "left" : "right";
    Goal s;
    s.path = g.path + "/" + label;
    s.formula = g.formula;
    for (size_t i = 0; i < g.assumptions.size(); ++i)
      if (static_cast<int>(i) != pick) s.assumptions.push_back(g.assumptions[i]);
    add_assumption(s, side == 0 ? d->a : d->b);
    r.subgoals.push_back({label, s});
  }
  return r;
}

RuleResult rule_allR(const Goal& g, const RuleApplication&, const std::string&) {
  if (g.formula->kind != FormulaKind::Forall) throw RuleError("allR needs a universal formula, got " + print(g.formula));
  Formula f = g.formula;
  VarSet bound;
  while (f->kind == FormulaKind::Forall) {
    bound.insert(f->bound);
    f = f->a;
  }
  RuleResult r;
  Goal s;
  s.path = g.path + "/main";
  s.formula = f;
  for (const auto& a : g.assumptions) {
    if (intersects(free_vars(a), bound))
      r.notes.push_back("dropped assumption " + print(a));
    else
      s.assumptions.push_back(a);
  }
  r.subgoals.push_back({"main", s});
  return r;
}

RuleResult rule_cut(const Goal& g, const RuleApplication& app, const std::string&) {
  if (!app.formula) throw RuleError("cut needs a formula");
  RuleResult r;
  r.subgoals.push_back({"show", sub(g, "show", app.formula)});
  Goal use = sub(g, "use", g.formula);
  add_assumption(use, app.formula);
  r.subgoals.push_back({"use", use});
  return r;
}

RuleResult rule_prop(const Goal& g, const RuleApplication&, const std::string&) {
  if (!tautology(imply(mk_and_all(g.assumptions), g.formula)))
    throw RuleError("not a propositional tautology: " + to_string(g));
  return {};
}

RuleResult rule_arith(const Goal& g, const RuleApplication&, const std::string& prefix) {
  Formula f = g.formula;
  VarSet bound;
  while (f->kind == FormulaKind::Forall) {
    bound.insert(f->bound);
    f = f->a;
  }
  if (!is_first_order(f)) throw RuleError("arith needs a first-order goal, got " + print(g.formula));
  RuleResult r;
  std::vector<Formula> ctx;
  for (const auto& a : g.assumptions) {
    if (!is_first_order(a)) continue;
    if (intersects(free_vars(a), bound)) {
      r.notes.push_back("dropped assumption " + print(a));
      continue;
    }
    ctx.push_back(a);
  }
  SideCondition c;
  c.name = prefix + ".arith";
  c.what = "real arithmetic";
  c.statement = imply(mk_and_all(ctx), f);
  c.exists_domain = mk_true();
  c.control_set = mk_true();
  if (is_quantifier_free(f)) c.matrix = c.statement;
  r.sides.push_back(c);
  return r;
}

RuleResult rule_assign(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::Assign, "assign");
  try {
    return one(g, substitute(f->a, f->game->var, f->game->term));
  } catch (const SubstitutionError& e) {
    throw RuleError(std::string("inadmissible substitution: ") + e.what());
  }
}

RuleResult rule_random(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::RandomAssign, "random-assign");
  bool box = f->kind == FormulaKind::Box;
  std::vector<Var> vs;
  Formula body = f;
  while (body->kind == f->kind && body->game->kind == GameKind::RandomAssign) {
    vs.push_back(body->game->var);
    body = body->a;
  }
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = box ? mk_forall(*it, body) : mk_exists(*it, body);
  return one(g, body);
}

RuleResult rule_test(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::Test, "test");
  const Formula& c = f->game->test;
  return one(g, f->kind == FormulaKind::Box ? mk_imply(c, f->a) : mk_and(c, f->a));
}

RuleResult rule_choice(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::Choice, "choice");
  if (f->kind == FormulaKind::Diamond)
    return one(g, mk_or(mk_diamond(f->game->a, f->a), mk_diamond(f->game->b, f->a)));
  RuleResult r;
  r.subgoals.push_back({"left", sub(g, "left", mk_box(f->game->a, f->a))});
  r.subgoals.push_back({"right", sub(g, "right", mk_box(f->game->b, f->a))});
  return r;
}

void flatten_seq(const Game& g, std::vector<Game>& out) {
  if (g->kind == GameKind::Seq) {
    flatten_seq(g->a, out);
    flatten_seq(g->b, out);
  } else {
    out.push_back(g);
  }
}

RuleResult rule_compose(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::Seq, "compose");
  std::vector<Game> parts;
  flatten_seq(f->game, parts);
  bool box = f->kind == FormulaKind::Box;
  Formula body = f->a;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) body = modal(box, *it, body);
  return one(g, body);
}

RuleResult rule_iterate(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::Repeat, "iterate");
  bool box = f->kind == FormulaKind::Box;
  Formula again = modal(box, f->game->a, f);
  return one(g, box ? mk_and(f->a, again) : mk_or(f->a, again));
}

RuleResult rule_dual(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = expect_modal(g, GameKind::Dual, "dual");
  bool box = f->kind == FormulaKind::Box;
  return one(g, mk_not(modal(box, f->game->a, negated(f->a))));
}

RuleResult rule_diamond_dual(const Goal& g, const RuleApplication&, const std::string&) {
  const Formula& f = g.formula;
  if (f->kind == FormulaKind::Diamond) return one(g, mk_not(mk_box(f->game, negated(f->a))));
  if (f->kind == FormulaKind::Not && is_modal(f->a)) {
    const Formula& m = f->a;
    return one(g, modal(m->kind == FormulaKind::Diamond, m->game, negated(m->a)));
  }
  throw RuleError("diamond-dual needs <a>P, !<a>P or ![a]P, got " + print(f));
}

RuleResult rule_monotone(const Goal& g, const RuleApplication& app, const std::string&) {
  const Formula& f = g.formula;
  if (app.formula) {
    if (!is_modal(f)) throw RuleError("monotone needs a modal goal, got " + print(f));
    bool box = f->kind == FormulaKind::Box;
    RuleResult r;
    r.subgoals.push_back({"pre", sub(g, "pre", modal(box, f->game, app.formula))});
    r.subgoals.push_back(
        {"post", sub_with(constant_context(g, bound_vars(f->game)), g, "post", mk_imply(app.formula, f->a))});
    return r;
  }
  if (f->kind == FormulaKind::Imply && is_modal(f->a) && f->a->kind == f->b->kind && equal(f->a->game, f->b->game)) {
    RuleResult r;
    r.subgoals.push_back({"main", sub_with(constant_context(g, bound_vars(f->a->game)), g, "main",
                                           mk_imply(f->a->a, f->b->a))});
    return r;
  }
  throw RuleError("monotone needs [a]P -> [a]Q or an intermediate formula, got " + print(f));
}

RuleResult rule_loop_ind(const Goal& g, const RuleApplication& app, const std::string&) {
  const Formula& f = g.formula;
  if (app.formula) {
    expect_modal(g, GameKind::Repeat, "loop-ind");
    if (f->kind != FormulaKind::Box) throw RuleError("loop-ind needs a box modality");
    const Formula& j = app.formula;
    std::vector<Formula> ctx = constant_context(g, bound_vars(f->game));
    RuleResult r;
    r.subgoals.push_back({"init", sub(g, "init", j)});
    Goal step = sub_with(ctx, g, "step", mk_box(f->game->a, j));
    add_assumption(step, j);
    r.subgoals.push_back({"step", step});
    Goal post = sub_with(ctx, g, "post", f->a);
    add_assumption(post, j);
    r.subgoals.push_back({"post", post});
    return r;
  }
  // psi -> [a*]psi  ~>  psi -> [a]psi
  if (f->kind == FormulaKind::Imply && f->b->kind == FormulaKind::Box &&
      f->b->game->kind == GameKind::Repeat && equal(f->a, f->b->a)) {
    std::vector<Formula> ctx = constant_context(g, bound_vars(f->b->game));
    return {{{"main", sub_with(ctx, g, "main", mk_imply(f->a, mk_box(f->b->game->a, f->a)))}}, {}, {}};
  }
  if (f->kind == FormulaKind::Box && f->game->kind == GameKind::Repeat) {
    std::vector<Formula> flat;
    flatten_and(f->a, flat);
    bool known = std::all_of(flat.begin(), flat.end(), [&](const Formula& p) { return contains(g.assumptions, p); });
    if (known) {
      Goal s = sub_with(constant_context(g, bound_vars(f->game)), g, "main", mk_box(f->game->a, f->a));
      add_assumption(s, f->a);
      return {{{"main", s}}, {}, {}};
    }
  }
  throw RuleError("loop-ind needs psi -> [a*]psi, psi assumed with [a*]psi, or an invariant argument");
}

const Game& expect_diffgame(const Goal& g, FormulaKind modality, const char* rule) {
  const Formula& f = g.formula;
  if (f->kind != modality || f->game->kind != GameKind::DiffGame)
    throw RuleError(std::string(rule) + " needs " + (modality == FormulaKind::Box ? "[g]F" : "<g>F") +
                    " with a differential game, got " + print(f));
  return f->game;
}

RuleResult rule_evolve(const Goal& g, const RuleApplication& app, const std::string& prefix) {
  const Formula& f = g.formula;
  if (!is_modal(f) || f->game->kind != GameKind::DiffGame)
    throw RuleError("evolve-solution needs a differential equation modality, got " + print(f));
  const Game& ode = f->game;
  if (!ode->demon.empty() || !ode->angel.empty())
    throw RuleError("evolve-solution applies to differential equations without controls");
  Var t = app.time ? *app.time : Var{"t"};
  VarSet taken = free_vars(f);
  for (const auto& a : g.assumptions)
    for (const Var& v : free_vars(a)) taken.insert(v);
  for (const Var& v : ode->states) taken.insert(v);
  if (taken.count(t)) throw RuleError("time variable " + to_string(t) + " is not fresh");
  std::map<Var, Term> sol = witness_map(app.solution);
  check_witness_targets(sol, ode->states, "state");
  RuleResult r;
  for (size_t i = 0; i < ode->states.size(); ++i) {
    const Var& x = ode->states[i];
    const Term& s = sol.at(x);
    Term at0 = substitute(s, t, mk_const(0));
    Term ds = fold_constants(substitute_diff(derive_term(s), {{t, mk_const(1)}}, true));
    Term fs = substitute(ode->rhs[i], sol);
    bool init_ok = false, ode_ok = false;
    try {
      init_ok = poly_equal(at0, mk_var(x));
      ode_ok = poly_equal(ds, fs);
    } catch (const PolyError& e) {
      throw RuleError(std::string("solution check failure: ") + e.what());
    }
    if (!init_ok) throw RuleError("solution check failure: " + print(at0) + " != " + to_string(x));
    if (!ode_ok) throw RuleError("solution check failure: d/dt " + print(s) + " = " + print(ds) + " != " + print(fs));
    std::string id = x.index ? x.name + std::to_string(x.index) : x.name;
    r.sides.push_back(forall_side(prefix + ".solution-init-" + id, "solution starts at the state", mk_true(), {},
                                  mk_true(), mk_cmp(CmpOp::Eq, at0, mk_var(x))));
    r.sides.push_back(forall_side(prefix + ".solution-ode-" + id, "solution satisfies the ODE", mk_true(), {},
                                  mk_true(), mk_cmp(CmpOp::Eq, ds, fs)));
  }
  Formula post;
  try {
    post = substitute(f->a, sol);
  } catch (const SubstitutionError& e) {
    throw RuleError(std::string("inadmissible substitution: ") + e.what());
  }
  Formula nonneg = mk_cmp(CmpOp::Ge, mk_var(t), mk_const(0));
  Formula out = f->kind == FormulaKind::Box ? mk_forall(t, mk_imply(nonneg, post)) : mk_exists(t, mk_and(nonneg, post));
  r.subgoals.push_back({"main", sub(g, "main", out)});
  return r;
}

RuleResult rule_dgi(const Goal& g, const RuleApplication& app, const std::string& prefix) {
  const Game& game = expect_diffgame(g, FormulaKind::Box, "DGI");
  const Formula& f = g.formula->a;
  RuleResult r;
  Formula premise = dgi_premise(f, game);
  require_well_defined(game, r);
  Formula body = lie_substitute(derive_formula(f), ode_bindings(game));
  Formula hyp = mk_and_all(constant_context(g, bound_vars(game)));
  if (!app.witness.empty()) {
    std::map<Var, Term> w = witness_map(app.witness);
    check_witness_targets(w, game->demon, "demon");
    VarSet angel(game->angel.begin(), game->angel.end());
    check_witness_vars(w, angel, "demon moves before angel");
    Formula ydom = substitute(game->demon_set, w);
    r.sides.push_back(forall_side(prefix + ".dgi-domain", "witness lies in the demon control set", hyp, {},
                                  mk_true(), ydom));
    Formula defs = witness_defs(w);
    if (defs->kind != FormulaKind::True)
      r.sides.push_back(forall_side(prefix + ".dgi-defined", "witness is defined", hyp, {}, mk_true(), defs));
    r.sides.push_back(forall_side(prefix + ".dgi-premise", "DGI premise at the witness", hyp, game->angel,
                                  game->angel_set, substitute(body, w)));
  } else {
    SideCondition c;
    c.name = prefix + ".dgi-premise";
    c.what = "DGI premise";
    c.statement = imply(hyp, premise);
    c.exists = game->demon;
    c.exists_domain = controls_constraint(game->demon, game->demon_set);
    c.controls = game->angel;
    c.control_set = controls_constraint(game->angel, game->angel_set);
    c.matrix = imply(hyp, imply(c.control_set, body));
    r.sides.push_back(c);
  }
  std::vector<Formula> parts;
  flatten_and(f, parts);
  bool known = std::all_of(parts.begin(), parts.end(), [&](const Formula& p) { return contains(g.assumptions, p); });
  if (!known) r.subgoals.push_back({"init", sub(g, "init", f)});
  return r;
}

Term payoff_term(const Formula& post) {
  if (post->kind != FormulaKind::Cmp || post->op != CmpOp::Ge)
    throw RuleError("DGV needs a postcondition of the shape g >= 0, got " + print(post));
  if (is_const(post->rhs, 0)) return post->lhs;
  return mk_sub(post->lhs, post->rhs);
}

RuleResult rule_dgv(const Goal& g, const RuleApplication& app, const std::string& prefix) {
  const Game& game = expect_diffgame(g, FormulaKind::Diamond, "DGV");
  Term gt = payoff_term(g.formula->a);
  RuleResult r;
  dgv_premise(gt, game);
  require_well_defined(game, r);
  if (!app.epsilon) throw RuleError("DGV needs an epsilon argument");
  if (*app.epsilon <= 0) throw RuleError("DGV needs epsilon > 0, got " + to_string(*app.epsilon));
  std::map<Var, Term> w = witness_map(app.witness);
  check_witness_targets(w, game->angel, "angel");
  VarSet demon(game->demon.begin(), game->demon.end());
  check_witness_vars(w, demon, "angel's witness may depend on the state only");
  Formula hyp = mk_and_all(constant_context(g, bound_vars(game)));
  Term lie = substitute(lie_of(gt, game), w);
  Formula body = mk_imply(mk_cmp(CmpOp::Le, gt, mk_const(0)), mk_cmp(CmpOp::Ge, lie, mk_const(*app.epsilon)));
  if (!game->angel.empty())
    r.sides.push_back(forall_side(prefix + ".dgv-domain", "witness lies in the angel control set", hyp, {},
                                  mk_true(), substitute(game->angel_set, w)));
  Formula defs = witness_defs(w);
  if (defs->kind != FormulaKind::True)
    r.sides.push_back(forall_side(prefix + ".dgv-defined", "witness is defined", hyp, {}, mk_true(), defs));
  r.sides.push_back(forall_side(prefix + ".dgv-premise", "DGV premise at the witness and epsilon", hyp, game->demon,
                                game->demon_set, body));
  return r;
}

void check_refinement_pair(const Game& g1, const Game& g2) {
  if (g2->kind != GameKind::DiffGame) throw RuleError("DGR needs a differential game argument");
  VarSet s1(g1->states.begin(), g1->states.end()), s2(g2->states.begin(), g2->states.end());
  if (g1->states.size() != g2->states.size() || s1 != s2)
    throw RuleError("DGR games have different state variables");
  VarSet c1(g1->demon.begin(), g1->demon.end());
  c1.insert(g1->angel.begin(), g1->angel.end());
  for (const auto& vs : {g2->demon, g2->angel})
    for (const Var& v : vs)
      if (c1.count(v) || s1.count(v))
        throw RuleError("DGR games share the control name " + to_string(v) + "; rename one side");
}

std::vector<Formula> matching_equations(const Game& g1, const Game& g2) {
  std::vector<Formula> eqs;
  for (size_t i = 0; i < g1->states.size(); ++i) {
    auto it = std::find(g2->states.begin(), g2->states.end(), g1->states[i]);
    size_t j = static_cast<size_t>(it - g2->states.begin());
    eqs.push_back(mk_cmp(CmpOp::Eq, g1->rhs[i], g2->rhs[j]));
  }
  return eqs;
}

RuleResult rule_dgr(const Goal& g, const RuleApplication& app, const std::string& prefix) {
  const Game& g1 = expect_diffgame(g, FormulaKind::Box, "DGR");
  if (!app.game) throw RuleError("DGR needs the antecedent game");
  const Game& g2 = app.game;
  check_refinement_pair(g1, g2);
  RuleResult r;
  Formula premise = dgr_premise(g1, g2);
  VarSet bound = bound_vars(g1);
  for (const Var& v : bound_vars(g2)) bound.insert(v);
  Formula hyp = mk_and_all(constant_context(g, bound));
  std::map<Var, Term> w = witness_map(app.witness);
  if (w.empty() && !(g1->demon.empty() && g2->angel.empty())) {
    SideCondition c;
    c.name = prefix + ".dgr-premise";
    c.what = "DGR premise";
    c.statement = imply(hyp, premise);
    c.exists_domain = mk_true();
    c.control_set = mk_true();
    r.sides.push_back(c);
  } else {
    std::map<Var, Term> wy, wv;
    for (const auto& [v, t] : w) {
      if (std::find(g1->demon.begin(), g1->demon.end(), v) != g1->demon.end())
        wy[v] = t;
      else if (std::find(g2->angel.begin(), g2->angel.end(), v) != g2->angel.end())
        wv[v] = t;
      else
        throw RuleError("witness target " + to_string(v) + " is neither a succedent demon nor an antecedent angel control");
    }
    check_witness_targets(wy, g1->demon, "succedent demon");
    check_witness_targets(wv, g2->angel, "antecedent angel");
    VarSet states(g1->states.begin(), g1->states.end());
    VarSet no_y = states;
    no_y.insert(g1->angel.begin(), g1->angel.end());
    no_y.insert(g2->angel.begin(), g2->angel.end());
    check_witness_vars(wy, no_y, "chosen before the angel moves and uniformly in the state");
    for (auto& [v, t] : wv) t = substitute(t, wy);
    VarSet no_v = states;
    no_v.insert(g2->angel.begin(), g2->angel.end());
    check_witness_vars(wv, no_v, "chosen uniformly in the state");
    std::vector<Var> uz = g2->demon;
    uz.insert(uz.end(), g1->angel.begin(), g1->angel.end());
    Formula u_set = controls_constraint(g2->demon, g2->demon_set);
    Formula z_set = controls_constraint(g1->angel, g1->angel_set);
    Formula uz_set = u_set->kind == FormulaKind::True ? z_set
                     : z_set->kind == FormulaKind::True ? u_set
                                                        : mk_and(u_set, z_set);
    if (!g1->demon.empty())
      r.sides.push_back(forall_side(prefix + ".dgr-domain-y", "succedent demon witness lies in its set", hyp,
                                    g2->demon, u_set, substitute(g1->demon_set, wy)));
    if (!g2->angel.empty())
      r.sides.push_back(forall_side(prefix + ".dgr-domain-v", "antecedent angel witness lies in its set", hyp, uz,
                                    uz_set, substitute(g2->angel_set, wv)));
    std::map<Var, Term> all = wy;
    all.insert(wv.begin(), wv.end());
    Formula defs = witness_defs(all);
    if (defs->kind != FormulaKind::True)
      r.sides.push_back(forall_side(prefix + ".dgr-defined", "witness is defined", hyp, uz, uz_set, defs));
    std::vector<Formula> eqs;
    for (const auto& e : matching_equations(g1, g2))
      eqs.push_back(mk_cmp(CmpOp::Eq, substitute(e->lhs, wy), substitute(e->rhs, wv)));
    r.sides.push_back(forall_side(prefix + ".dgr-match", "dynamics agree under the witnesses", hyp, uz, uz_set,
                                  mk_and_all(eqs)));
  }
  Formula refined = mk_box(g2, g.formula->a);
  if (!contains(g.assumptions, refined)) r.subgoals.push_back({"refined", sub(g, "refined", refined)});
  return r;
}

const std::vector<std::pair<std::string, RuleFn>>& rule_table() {
  static const std::vector<std::pair<std::string, RuleFn>> table = {
      {"DGI", rule_dgi},
      {"DGV", rule_dgv},
      {"DGR", rule_dgr},
      {"assign", rule_assign},
      {"random-assign", rule_random},
      {"test", rule_test},
      {"choice", rule_choice},
      {"compose", rule_compose},
      {"iterate", rule_iterate},
      {"dual", rule_dual},
      {"diamond-dual", rule_diamond_dual},
      {"evolve-solution", rule_evolve},
      {"monotone", rule_monotone},
      {"loop-ind", rule_loop_ind},
      {"arith", rule_arith},
      {"implyR", rule_implyR},
      {"andR", rule_andR},
      {"orL", rule_orL},
      {"allR", rule_allR},
      {"cut", rule_cut},
      {"prop", rule_prop},
  };
  return table;
}

}  // namespace

// --- goals -------------------------------------------------------------------------

Goal make_goal(const Formula& f) {
  Goal g;
  g.formula = f;
  g.path = "root";
  return g;
}

void add_assumption(Goal& g, const Formula& a) {
  std::vector<Formula> parts;
  flatten_and(a, parts);
  for (const auto& p : parts)
    if (!contains(g.assumptions, p)) g.assumptions.push_back(p);
}

std::string to_string(const Goal& g) {
  std::string s;
  for (size_t i = 0; i < g.assumptions.size(); ++i) s += (i ? ", " : "") + print(g.assumptions[i]);
  return s + (s.empty() ? "|- " : " |- ") + print(g.formula);
}

const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [n, _] : rule_table()) out.push_back(n);
    return out;
  }();
  return names;
}

std::string canonical_rule(const std::string& name) {
  static const std::map<std::string, std::string> aliases = {
      {"M", "monotone"}, {"ind", "loop-ind"}, {"qear", "arith"}, {"evolve", "evolve-solution"},
      {"diamond", "diamond-dual"}, {"dgi", "DGI"}, {"dgv", "DGV"}, {"dgr", "DGR"}};
  if (auto it = aliases.find(name); it != aliases.end()) return it->second;
  for (const auto& n : rule_names())
    if (n == name) return n;
  return "";
}

// --- premises ----------------------------------------------------------------------

Formula dgi_premise(const Formula& f, const Game& g) {
  if (g->kind != GameKind::DiffGame) throw RuleError("DGI needs a differential game");
  check_quantifier_free(f, "DGI postcondition");
  if (has_witness_ops(f)) throw RuleError("DGI postcondition may not use division or sqrt");
  if (!is_atomically_open(f) && !is_atomically_closed(f))
    throw RuleError("DGI postcondition mixes strict and weak atoms: " + print(f));
  Formula body = lie_substitute(derive_formula(f), ode_bindings(g));
  Formula inner = forall_block(g->angel, g->angel_set, body);
  return exists_block(g->demon, g->demon_set, inner);
}

Formula dgv_premise(const Term& gt, const Game& g) {
  if (g->kind != GameKind::DiffGame) throw RuleError("DGV needs a differential game");
  if (has_witness_ops(gt)) throw RuleError("DGV payoff may not use division or sqrt");
  VarSet avoid = all_vars(g);
  for (const Var& v : free_vars(gt)) avoid.insert(v);
  Var eps = avoid.count(Var{"eps"}) ? fresh_var("e", avoid) : Var{"eps"};
  Formula body = mk_imply(mk_cmp(CmpOp::Le, gt, mk_const(0)), mk_cmp(CmpOp::Ge, lie_of(gt, g), mk_var(eps)));
  Formula inner = forall_block(g->demon, g->demon_set, body);
  inner = exists_block(g->angel, g->angel_set, inner);
  for (auto it = g->states.rbegin(); it != g->states.rend(); ++it) inner = mk_forall(*it, inner);
  return mk_exists(eps, mk_and(mk_cmp(CmpOp::Gt, mk_var(eps), mk_const(0)), inner));
}

Formula dgr_premise(const Game& g1, const Game& g2) {
  if (g1->kind != GameKind::DiffGame) throw RuleError("DGR needs differential games");
  check_refinement_pair(g1, g2);
  Formula body = mk_and_all(matching_equations(g1, g2));
  for (auto it = g1->states.rbegin(); it != g1->states.rend(); ++it) body = mk_forall(*it, body);
  body = exists_block(g2->angel, g2->angel_set, body);
  body = forall_block(g1->angel, g1->angel_set, body);
  body = exists_block(g1->demon, g1->demon_set, body);
  return forall_block(g2->demon, g2->demon_set, body);
}

RuleResult apply_rule(const Goal& goal, const RuleApplication& app, const std::string& prefix) {
  std::string name = canonical_rule(app.rule);
  for (const auto& [n, fn] : rule_table())
    if (n == name) {
      try {
        return fn(goal, app, prefix);
      } catch (const RuleError&) {
        throw;
      } catch (const std::exception& e) {
        throw RuleError(n + ": " + e.what());
      }
    }
  throw RuleError("unknown rule '" + app.rule + "'");
}

}  // namespace dhg

// --- discharge ---------------------------------------------------------------------

namespace dhg {

std::string to_string(SideVerdict v) {
  switch (v) {
    case SideVerdict::Valid: return "valid";
    case SideVerdict::ValidOnRegion: return "valid-on-region";
    case SideVerdict::Falsified: return "falsified";
    case SideVerdict::Open: return "open";
  }
  return "?";
}

std::string to_string(ProofStatus s) {
  switch (s) {
    case ProofStatus::Proved: return "proved";
    case ProofStatus::ProvedOnRegion: return "proved-on-region";
    case ProofStatus::Open: return "open";
    case ProofStatus::Failed: return "failed";
  }
  return "?";
}

int exit_code(ProofStatus s) {
  switch (s) {
    case ProofStatus::Proved: return 0;
    case ProofStatus::ProvedOnRegion: return 2;
    case ProofStatus::Open: return 3;
    case ProofStatus::Failed: return 4;
  }
  return 4;
}

namespace {

Formula strip_hypotheses(Formula f) {
  while (f->kind == FormulaKind::Imply) f = f->b;
  return f;
}

// Conclusion is a conjunction of polynomial identities.
bool identity_holds(const Formula& matrix) {
  std::vector<Formula> parts;
  flatten_and(strip_hypotheses(matrix), parts);
  if (parts.empty()) return false;
  for (const auto& p : parts) {
    if (p->kind != FormulaKind::Cmp || p->op != CmpOp::Eq) return false;
    try {
      if (!poly_equal(p->lhs, p->rhs)) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

std::map<Var, Term> as_substitution(const RatEnv& env) {
  std::map<Var, Term> out;
  for (const auto& [v, q] : env) out[v] = mk_const(q);
  return out;
}

RatEnv point_params(const RationalBox& b) {
  RatEnv out;
  for (const auto& [v, lh] : b.bounds)
    if (lh.first == lh.second) out[v] = lh.first;
  return out;
}

Discharge exact_discharge(const SideCondition& c) {
  Discharge d;
  if (c.matrix && c.exists.empty()) {
    VarSet fv = free_vars(c.matrix);
    if (fv.empty()) {
      if (auto v = holds_exact(c.matrix, {})) {
        d.verdict = *v ? SideVerdict::Valid : SideVerdict::Falsified;
        d.method = "exact";
        return d;
      }
    }
    if (identity_holds(c.matrix)) {
      d.verdict = SideVerdict::Valid;
      d.method = "polynomial identity";
      return d;
    }
  }
  return d;
}

// Region-wise check of the structured form.
Discharge region_discharge(const SideCondition& c, const std::vector<NamedRegion>& regions, const BackendConfig& cfg) {
  Discharge d;
  d.method = "regions";
  if (!c.matrix) {
    d.detail = "not quantifier-free";
    return d;
  }
  if (regions.empty()) {
    d.detail = "no regions";
    return d;
  }
  VarSet skip(c.controls.begin(), c.controls.end());
  skip.insert(c.exists.begin(), c.exists.end());
  VarSet needed;
  for (const Var& v : free_vars(c.matrix))
    if (!skip.count(v)) needed.insert(v);
  for (const Var& v : free_vars(c.exists_domain))
    if (!skip.count(v)) needed.insert(v);
  bool all_valid = true;
  std::string detail;
  for (const auto& r : regions) {
    std::string tag = r.name.empty() ? "region" : r.name;
    RationalBox outer;
    std::string missing;
    for (const Var& v : needed) {
      auto it = r.box.bounds.find(v);
      if (it == r.box.bounds.end())
        missing += (missing.empty() ? "" : ", ") + to_string(v);
      else
        outer.bounds[v] = it->second;
    }
    if (!missing.empty()) {
      all_valid = false;
      detail += tag + ": does not bound " + missing + "; ";
      continue;
    }
    RationalBox inner;
    if (!c.controls.empty()) {
      ControlShape shape = analyse_controls(c.controls, c.control_set, point_params(outer));
      bool ok = shape.compact;
      for (const Var& u : c.controls)
        if (!shape.box.count(u)) ok = false;
      if (!ok) {
        all_valid = false;
        detail += tag + ": control set has no evaluable bounding box; ";
        continue;
      }
      for (const Var& u : c.controls) inner.bounds[u] = shape.box.at(u);
    }
    try {
      if (c.exists.empty()) {
        RationalBox box = outer;
        box.bounds.insert(inner.bounds.begin(), inner.bounds.end());
        Verdict v = decide_forall(c.matrix, box, cfg.forall);
        if (v.kind == VerdictKind::Falsified) {
          d.verdict = SideVerdict::Falsified;
          d.detail = tag + ": counterexample";
          if (v.witness)
            for (const auto& [x, q] : *v.witness) d.detail += " " + to_string(x) + "=" + to_string(q);
          return d;
        }
        if (v.kind != VerdictKind::Valid) {
          all_valid = false;
          detail += tag + ": undecided after " + std::to_string(v.boxes) + " boxes; ";
        } else {
          detail += tag + ": " + std::to_string(v.boxes) + " boxes; ";
        }
      } else {
        ExistsForallResult res = search_exists_forall(c.exists, c.exists_domain, c.matrix, outer, inner, cfg.exists);
        if (res.verdict.kind != VerdictKind::Valid) {
          all_valid = false;
          detail += tag + ": no witness found; ";
        } else {
          detail += tag + ": " + std::to_string(res.pieces.size()) + " witness piece(s); ";
        }
      }
    } catch (const std::exception& e) {
      all_valid = false;
      detail += tag + ": " + e.what() + "; ";
    }
  }
  d.detail = detail;
  if (all_valid) d.verdict = SideVerdict::ValidOnRegion;
  return d;
}

Discharge combine_points(const SideCondition& c, const std::vector<RatEnv>& points,
                         const std::vector<NamedRegion>& regions, const BackendConfig& cfg) {
  Discharge out;
  out.method = "control enumeration";
  out.verdict = SideVerdict::Valid;
  BackendConfig quiet = cfg;
  quiet.emit_smt_dir.clear();
  for (const auto& p : points) {
    SideCondition s = c;
    s.controls.clear();
    s.control_set = mk_true();
    s.matrix = substitute(c.matrix, as_substitution(p));
    s.statement = s.matrix;
    Discharge d = discharge(s, regions, quiet);
    std::string at;
    for (const auto& [v, q] : p) at += (at.empty() ? "" : ",") + to_string(v) + "=" + to_string(q);
    out.detail += "[" + at + "] " + to_string(d.verdict) + "; ";
    if (d.verdict == SideVerdict::Falsified) {
      out.verdict = SideVerdict::Falsified;
      return out;
    }
    if (d.verdict == SideVerdict::Open) out.verdict = SideVerdict::Open;
    if (d.verdict == SideVerdict::ValidOnRegion && out.verdict == SideVerdict::Valid)
      out.verdict = SideVerdict::ValidOnRegion;
  }
  return out;
}

void export_open(const SideCondition& c, const BackendConfig& cfg, Discharge& d) {
  if (cfg.emit_smt_dir.empty() || d.verdict != SideVerdict::Open) return;
  std::filesystem::create_directories(cfg.emit_smt_dir);
  std::filesystem::path p = std::filesystem::path(cfg.emit_smt_dir) / (cfg.smt_prefix + c.name + ".smt2");
  std::ofstream out(p);
  out << "; " << c.name << ": " << c.what << "\n" << export_smtlib(c.statement);
  d.smt_file = p.string();
}

}  // namespace

Discharge discharge(const SideCondition& c, const std::vector<NamedRegion>& regions, const BackendConfig& cfg) {
  Discharge d = exact_discharge(c);
  if (d.verdict != SideVerdict::Open) return d;

  if (c.matrix && c.exists.empty() && !c.controls.empty()) {
    ControlShape shape = analyse_controls(c.controls, c.control_set);
    if (shape.finite_points && !shape.finite_points->empty()) {
      d = combine_points(c, *shape.finite_points, regions, cfg);
      if (d.verdict != SideVerdict::Open) return d;
    }
  }

  bool refuted = false;
  std::string solver_note;
  if (cfg.external_solver && external_solver_available()) {
    SolverResult s = run_external_solver(export_smtlib(c.statement), cfg.solver_timeout);
    if (s.answer == SolverAnswer::Unsat) {
      d.verdict = SideVerdict::Valid;
      d.method = "external solver";
      return d;
    }
    if (s.answer == SolverAnswer::Sat) {
      refuted = true;
      solver_note = "external solver: not valid for all reals";
    } else {
      solver_note = "external solver: unknown";
    }
  }

  // Only control and witness variables: their bounding boxes cover the whole domain.
  VarSet rest;
  if (c.matrix) {
    VarSet skip(c.controls.begin(), c.controls.end());
    skip.insert(c.exists.begin(), c.exists.end());
    for (const Var& v : free_vars(c.matrix))
      if (!skip.count(v)) rest.insert(v);
    for (const Var& v : free_vars(c.exists_domain))
      if (!skip.count(v)) rest.insert(v);
  }
  if (c.matrix && rest.empty()) {
    d = region_discharge(c, {NamedRegion{"controls", {}}}, cfg);
    if (d.verdict == SideVerdict::ValidOnRegion) {
      d.verdict = SideVerdict::Valid;
      d.method = "control box";
      return d;
    }
  }

  d = region_discharge(c, regions, cfg);
  if (!solver_note.empty()) d.detail = solver_note + "; " + d.detail;
  // A global refutation stands unless the regions certify the restricted claim.
  if (refuted && d.verdict == SideVerdict::Open) d.verdict = SideVerdict::Falsified;
  export_open(c, cfg, d);
  return d;
}

// --- proof checking ------------------------------------------------------------------

namespace {

struct Checker {
  const ProofScript& script;
  ProofResult result;
  int counter = 0;
  bool failed = false;

  void fail(int index, int line, const std::string& why) {
    failed = true;
    result.status = ProofStatus::Failed;
    result.failed_step = index;
    result.failed_line = line;
    result.reason = why;
  }

  void run(const std::vector<ProofStep>& steps, Goal goal) {
    for (size_t i = 0; i < steps.size() && !failed; ++i) {
      const ProofStep& step = steps[i];
      if (step.open) {
        result.open_goals.push_back(goal);
        return;
      }
      int index = ++counter;
      StepRecord rec;
      rec.index = index;
      rec.line = step.app.line;
      rec.rule = step.app.rule;
      rec.path = goal.path;
      rec.goal = to_string(goal);
      RuleResult rr;
      try {
        rr = apply_rule(goal, step.app, "s" + std::to_string(index));
      } catch (const std::exception& e) {
        result.steps.push_back(rec);
        fail(index, step.app.line, e.what());
        return;
      }
      rec.notes = rr.notes;
      for (const auto& side : rr.sides) {
        Discharge d = discharge(side, script.regions, script.backend);
        if (d.verdict == SideVerdict::Open) result.open_conditions.push_back(side.name);
        rec.sides.push_back({side, d});
        if (d.verdict == SideVerdict::Falsified) {
          result.steps.push_back(rec);
          fail(index, step.app.line, side.name + " is falsified: " + d.detail);
          return;
        }
      }
      result.steps.push_back(rec);
      bool last = i + 1 == steps.size();
      if (!step.cases.empty()) {
        if (!last) {
          fail(index, step.app.line, "steps after case blocks");
          return;
        }
        for (const auto& [label, _] : step.cases) {
          bool known = std::any_of(rr.subgoals.begin(), rr.subgoals.end(),
                                   [&](const auto& s) { return s.first == label; });
          if (!known) {
            fail(index, step.app.line, "rule " + step.app.rule + " has no subgoal '" + label + "'");
            return;
          }
        }
        for (const auto& [label, sg] : rr.subgoals) {
          auto it = std::find_if(step.cases.begin(), step.cases.end(), [&](const auto& c) { return c.first == label; });
          if (it == step.cases.end())
            result.open_goals.push_back(sg);
          else
            run(it->second, sg);
          if (failed) return;
        }
        return;
      }
      if (rr.subgoals.empty()) {
        if (!last) fail(steps[i + 1].app.line ? counter + 1 : index, steps[i + 1].app.line, "goal already closed");
        return;
      }
      if (rr.subgoals.size() > 1) {
        if (!last) {
          fail(index, step.app.line, "rule " + step.app.rule + " produces several subgoals; use case blocks");
          return;
        }
        for (const auto& [_, sg] : rr.subgoals) result.open_goals.push_back(sg);
        return;
      }
      goal = rr.subgoals[0].second;
      if (last) result.open_goals.push_back(goal);
    }
    if (steps.empty()) result.open_goals.push_back(goal);
  }
};

}  // namespace

ProofResult check_proof(const ProofScript& script) {
  Checker ck{script, {}};
  ck.run(script.steps, make_goal(script.goal));
  ProofResult r = std::move(ck.result);
  if (ck.failed) return r;
  bool regional = false;
  for (const auto& s : r.steps)
    for (const auto& [_, d] : s.sides)
      if (d.verdict == SideVerdict::ValidOnRegion) regional = true;
  if (!r.open_goals.empty() || !r.open_conditions.empty())
    r.status = ProofStatus::Open;
  else
    r.status = regional ? ProofStatus::ProvedOnRegion : ProofStatus::Proved;
  return r;
}

std::string report(const ProofResult& r) {
  std::ostringstream out;
  for (const auto& s : r.steps) {
    out << "step " << s.index;
    if (s.line) out << " (line " << s.line << ")";
    out << " " << s.rule << " at " << s.path << "\n";
    for (const auto& n : s.notes) out << "  note: " << n << "\n";
    for (const auto& [c, d] : s.sides) {
      out << "  " << c.name << " [" << c.what << "]: " << to_string(d.verdict);
      if (!d.method.empty()) out << " by " << d.method;
      out << "\n";
      if (!d.detail.empty()) out << "    " << d.detail << "\n";
      if (!d.smt_file.empty()) out << "    exported " << d.smt_file << "\n";
    }
  }
  for (const auto& g : r.open_goals) out << "open goal " << g.path << ": " << to_string(g) << "\n";
  for (const auto& c : r.open_conditions) out << "open condition " << c << "\n";
  if (r.status == ProofStatus::Failed)
    out << "failed at step " << r.failed_step << " (line " << r.failed_line << "): " << r.reason << "\n";
  out << "status: " << to_string(r.status) << "\n";
  return out.str();
}

}  // namespace dhg
