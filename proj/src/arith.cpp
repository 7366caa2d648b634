#include "dhg/arith.hpp"

#include <omp.h>

#include <algorithm>
#include <functional>
#include <sstream>

#include "dhg/poly.hpp"
#include "dhg/printer.hpp"
#include "dhg/symbolic.hpp"
#include "dhg/vars.hpp"

namespace dhg {

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Valid: return "Valid";
    case VerdictKind::Falsified: return "Falsified";
    case VerdictKind::Unknown: return "Unknown";
  }
  return "?";
}

Box to_interval_box(const RationalBox& b) {
  Box out;
  for (const auto& [v, lh] : b.bounds) out[v] = Interval::of(lh.first, lh.second);
  return out;
}

Interval interval_eval(const Term& t, const Box& box, bool* clipped) {
  switch (t->kind) {
    case TermKind::Const: return Interval::of(t->value);
    case TermKind::Var: {
      auto it = box.find(t->var);
      if (it == box.end()) throw EvalError("variable " + to_string(t->var) + " is not covered by the box");
      return it->second;
    }
    case TermKind::Diff: throw EvalError("differential symbols have no interval value");
    case TermKind::Neg: return -interval_eval(t->a, box, clipped);
    case TermKind::Pow: return ipow(interval_eval(t->a, box, clipped), t->exp);
    case TermKind::Sqrt: return isqrt(interval_eval(t->a, box, clipped), clipped);
    case TermKind::Add: return interval_eval(t->a, box, clipped) + interval_eval(t->b, box, clipped);
    case TermKind::Mul: return interval_eval(t->a, box, clipped) * interval_eval(t->b, box, clipped);
    case TermKind::Min: return imin(interval_eval(t->a, box, clipped), interval_eval(t->b, box, clipped));
    case TermKind::Max: return imax(interval_eval(t->a, box, clipped), interval_eval(t->b, box, clipped));
    case TermKind::Div: return idiv(interval_eval(t->a, box, clipped), interval_eval(t->b, box, clipped));
  }
  return Interval::entire();
}

namespace {

// Interval bytecode over a fixed slot layout. Undefined operations on a box
// (division through 0, sqrt of a negative interval) yield the entire line.
class IntervalProgram {
 public:
  IntervalProgram() = default;
  IntervalProgram(const Term& t, const std::vector<Var>& slots) { emit(t, slots); }

  Interval operator()(const Interval* x) const {
    Interval stack[64];
    int sp = -1;
    for (const Instr& in : code_) {
      switch (in.op) {
        case Op::Const: stack[++sp] = in.value; break;
        case Op::Load: stack[++sp] = x[in.arg]; break;
        case Op::Neg: stack[sp] = -stack[sp]; break;
        case Op::Pow: stack[sp] = ipow(stack[sp], in.arg); break;
        case Op::Sqrt:
          if (stack[sp].hi < 0) return Interval::entire();
          stack[sp] = isqrt(stack[sp]);
          break;
        case Op::Add: stack[sp - 1] = stack[sp - 1] + stack[sp]; --sp; break;
        case Op::Mul: stack[sp - 1] = stack[sp - 1] * stack[sp]; --sp; break;
        case Op::Min: stack[sp - 1] = imin(stack[sp - 1], stack[sp]); --sp; break;
        case Op::Max: stack[sp - 1] = imax(stack[sp - 1], stack[sp]); --sp; break;
        case Op::Div:
          if (stack[sp].contains_zero()) return Interval::entire();
          stack[sp - 1] = idiv(stack[sp - 1], stack[sp]);
          --sp;
          break;
      }
    }
    return stack[0];
  }

 private:
  enum class Op : unsigned char { Const, Load, Neg, Add, Mul, Pow, Min, Max, Div, Sqrt };
  struct Instr {
    Op op;
    unsigned arg = 0;
    Interval value{};
  };
  void emit(const Term& t, const std::vector<Var>& slots) {
    auto push = [&](Instr in) {
      code_.push_back(in);
      depth_ = std::max(depth_, ++cur_);
      if (depth_ > 64) throw EvalError("term too deep for interval evaluation");
    };
    switch (t->kind) {
      case TermKind::Const: push({Op::Const, 0, Interval::of(t->value)}); return;
      case TermKind::Var: {
        auto it = std::find(slots.begin(), slots.end(), t->var);
        if (it == slots.end()) throw EvalError("variable " + to_string(t->var) + " is not covered by the box");
        push({Op::Load, static_cast<unsigned>(it - slots.begin())});
        return;
      }
      case TermKind::Diff: throw EvalError("differential symbols have no interval value");
      case TermKind::Neg: emit(t->a, slots); code_.push_back({Op::Neg}); return;
      case TermKind::Sqrt: emit(t->a, slots); code_.push_back({Op::Sqrt}); return;
      case TermKind::Pow: emit(t->a, slots); code_.push_back({Op::Pow, t->exp}); return;
      default: break;
    }
    emit(t->a, slots);
    emit(t->b, slots);
    Op op = Op::Add;
    switch (t->kind) {
      case TermKind::Mul: op = Op::Mul; break;
      case TermKind::Min: op = Op::Min; break;
      case TermKind::Max: op = Op::Max; break;
      case TermKind::Div: op = Op::Div; break;
      default: break;
    }
    code_.push_back({op});
    --cur_;
  }
  std::vector<Instr> code_;
  size_t depth_ = 0, cur_ = 0;
};

Polynomial partial(const Polynomial& p, const Var& v) {
  Polynomial out;
  for (const auto& [m, c] : p.terms()) {
    Polynomial term = Polynomial::constant(c);
    bool has = false;
    for (const auto& [ind, e] : m) {
      if (ind.var == v && !ind.diff) {
        has = true;
        term = term.scale(Rational(e));
        if (e > 1) term = term * Polynomial::indet(ind).pow(e - 1);
      } else {
        term = term * Polynomial::indet(ind).pow(e);
      }
    }
    if (has) out = out + term;
  }
  return out;
}

// min/max elimination: F[min(a,b)] <-> (a <= b -> F[a]) & (b <= a -> F[b]).
std::optional<Term> find_minmax(const Term& t) {
  if (!t) return std::nullopt;
  if (t->kind == TermKind::Min || t->kind == TermKind::Max) {
    if (auto in = find_minmax(t->a)) return in;
    if (auto in = find_minmax(t->b)) return in;
    return t;
  }
  if (auto in = find_minmax(t->a)) return in;
  return find_minmax(t->b);
}

Term replace_term(const Term& t, const Term& target, const Term& by) {
  if (!t) return t;
  if (equal(t, target)) return by;
  if (!t->a) return t;
  TermNode n = *t;
  n.a = replace_term(t->a, target, by);
  if (t->b) n.b = replace_term(t->b, target, by);
  return std::make_shared<const TermNode>(std::move(n));
}

Formula eliminate_minmax(const Formula& f, int& budget) {
  switch (f->kind) {
    case FormulaKind::And: return mk_and(eliminate_minmax(f->a, budget), eliminate_minmax(f->b, budget));
    case FormulaKind::Or: return mk_or(eliminate_minmax(f->a, budget), eliminate_minmax(f->b, budget));
    case FormulaKind::Cmp: {
      auto m = find_minmax(f->lhs);
      if (!m) m = find_minmax(f->rhs);
      if (!m || budget <= 0) return f;
      --budget;
      const Term& a = (*m)->a;
      const Term& b = (*m)->b;
      bool is_min = (*m)->kind == TermKind::Min;
      auto branch = [&](const Term& pick, const Term& other) {
        Formula when = mk_cmp(is_min ? CmpOp::Gt : CmpOp::Lt, pick, other);  // negated guard
        Formula body = mk_cmp(f->op, replace_term(f->lhs, *m, pick), replace_term(f->rhs, *m, pick));
        return mk_or(when, eliminate_minmax(body, budget));
      };
      return mk_and(branch(a, b), branch(b, a));
    }
    default: return f;
  }
}

enum class AtomKind { Pos, NonNeg, Zero, NonZero };

struct Atom {
  AtomKind kind;
  IntervalProgram natural;
  std::optional<IntervalProgram> factored;
  std::optional<IntervalProgram> at_center;
  std::vector<std::pair<unsigned, IntervalProgram>> gradient;
  std::optional<bool> constant;
  // Atom linear in one slot: where it is false, that slot is bounded.
  struct FalseRegion {
    unsigned slot;
    double lo, hi;
  };
  std::optional<FalseRegion> false_region;
};

struct Node {
  enum Kind { True, False, And, Or, Leaf } kind;
  int a = -1, b = -1, atom = -1;
};

// -1 undecided, 0 false, 1 true
using State = std::vector<signed char>;

class Problem {
 public:
  Problem(const Formula& f, const RationalBox& box) : original_(f) {
    for (const auto& [v, _] : box.bounds) slots_.push_back(v);
    for (const Var& v : free_vars(f))
      if (!box.bounds.count(v)) throw EvalError("variable " + to_string(v) + " is not covered by the box");
    Formula g = nnf(f);
    check_fragment(g);
    int mm = 12;
    g = eliminate_minmax(g, mm);
    processed_ = g;
    root_ = build(g);
    point_check_ = CompiledFormula(g, slots_);
    for (const auto& [v, lh] : box.bounds) {
      lo_.push_back(lh.first);
      hi_.push_back(lh.second);
      if (lh.first > lh.second) throw EvalError("empty box for " + to_string(v));
    }
  }

  const std::vector<Var>& slots() const { return slots_; }
  size_t node_count() const { return nodes_.size(); }
  const Rational& rlo(size_t i) const { return lo_[i]; }
  const Rational& rhi(size_t i) const { return hi_[i]; }

  struct Result {
    signed char root = -1;
    State state;
    std::optional<RatEnv> counterexample;
  };

  Result evaluate(const std::vector<Interval>& box, const State& inherited) const {
    Result r;
    r.state = inherited;
    r.root = eval_node(root_, box, r.state);
    if (r.root == 0) {
      r.counterexample = refute_at(midpoint(box));
    } else if (r.root < 0) {
      std::vector<double> mid(box.size());
      for (size_t i = 0; i < box.size(); ++i) mid[i] = box[i].mid();
      if (!point_check_(mid.data())) r.counterexample = refute_at(midpoint(box));
    }
    return r;
  }

  // Exact confirmation; nullopt if the point does not refute F exactly.
  std::optional<RatEnv> refute_at(const RatEnv& p) const {
    auto v = holds_exact(original_, p);
    if (v && !*v) return p;
    return std::nullopt;
  }

  RatEnv midpoint(const std::vector<Interval>& box) const {
    RatEnv p;
    for (size_t i = 0; i < slots_.size(); ++i) {
      if (lo_[i] == hi_[i]) {
        p[slots_[i]] = lo_[i];
        continue;
      }
      Rational m = from_double(box[i].mid());
      p[slots_[i]] = std::clamp(m, lo_[i], hi_[i]);
    }
    return p;
  }

  bool double_refutes(const std::vector<double>& x) const { return !point_check_(x.data()); }

 private:
  static void check_fragment(const Formula& f) {
    switch (f->kind) {
      case FormulaKind::True:
      case FormulaKind::False:
      case FormulaKind::Cmp: return;
      case FormulaKind::And:
      case FormulaKind::Or:
        check_fragment(f->a);
        check_fragment(f->b);
        return;
      default: throw EvalError("decide_forall needs a quantifier-free, modality-free formula");
    }
  }

  int build(const Formula& f) {
    Node n{};
    switch (f->kind) {
      case FormulaKind::True: n.kind = Node::True; break;
      case FormulaKind::False: n.kind = Node::False; break;
      case FormulaKind::And:
      case FormulaKind::Or:
        n.kind = f->kind == FormulaKind::And ? Node::And : Node::Or;
        n.a = build(f->a);
        n.b = build(f->b);
        break;
      default:
        n.kind = Node::Leaf;
        n.atom = static_cast<int>(atoms_.size());
        atoms_.push_back(make_atom(f));
        break;
    }
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  Atom make_atom(const Formula& f) {
    Atom at;
    Term g;
    switch (f->op) {
      case CmpOp::Gt: at.kind = AtomKind::Pos; g = mk_sub(f->lhs, f->rhs); break;
      case CmpOp::Ge: at.kind = AtomKind::NonNeg; g = mk_sub(f->lhs, f->rhs); break;
      case CmpOp::Lt: at.kind = AtomKind::Pos; g = mk_sub(f->rhs, f->lhs); break;
      case CmpOp::Le: at.kind = AtomKind::NonNeg; g = mk_sub(f->rhs, f->lhs); break;
      case CmpOp::Eq: at.kind = AtomKind::Zero; g = mk_sub(f->lhs, f->rhs); break;
      case CmpOp::Ne: at.kind = AtomKind::NonZero; g = mk_sub(f->lhs, f->rhs); break;
    }
    at.natural = IntervalProgram(g, slots_);
    try {
      Polynomial p = poly_normalize(g);
      if (p.is_constant()) {
        Rational c = p.constant_value();
        switch (at.kind) {
          case AtomKind::Pos: at.constant = c > 0; break;
          case AtomKind::NonNeg: at.constant = c >= 0; break;
          case AtomKind::Zero: at.constant = c == 0; break;
          case AtomKind::NonZero: at.constant = c != 0; break;
        }
        return at;
      }
      if (p.degree() == 1 && at.kind != AtomKind::Zero) {
        std::optional<Var> only;
        Rational k;
        bool single = true;
        for (const auto& [mono, c] : p.terms()) {
          if (mono.empty()) continue;
          if (only || mono.front().first.diff) single = false;
          only = mono.front().first.var;
          k = c;
        }
        if (single && only) {
          Rational root = -p.constant_value() / k;
          unsigned slot = static_cast<unsigned>(std::find(slots_.begin(), slots_.end(), *only) - slots_.begin());
          double inf = rnd::kInf;
          if (at.kind == AtomKind::NonZero)
            at.false_region = Atom::FalseRegion{slot, to_double_down(root), to_double_up(root)};
          else if (k > 0)
            at.false_region = Atom::FalseRegion{slot, -inf, to_double_up(root)};
          else
            at.false_region = Atom::FalseRegion{slot, to_double_down(root), inf};
        }
      }
      Monomial m = p.content();
      Term fac = m.empty() ? p.to_term() : mk_mul(monomial_term(m), p.divide_monomial(m).to_term());
      at.factored = IntervalProgram(fac, slots_);
      at.at_center = IntervalProgram(p.to_term(), slots_);
      for (unsigned i = 0; i < slots_.size(); ++i) {
        Polynomial d = partial(p, slots_[i]);
        if (!d.is_zero()) at.gradient.emplace_back(i, IntervalProgram(d.to_term(), slots_));
      }
    } catch (const PolyError&) {
    }
    return at;
  }

  static signed char decide(AtomKind k, Interval e) {
    switch (k) {
      case AtomKind::Pos:
        if (e.lo > 0) return 1;
        if (e.hi <= 0) return 0;
        return -1;
      case AtomKind::NonNeg:
        if (e.lo >= 0) return 1;
        if (e.hi < 0) return 0;
        return -1;
      case AtomKind::Zero:
        if (e.lo == 0 && e.hi == 0) return 1;
        if (!e.contains_zero()) return 0;
        return -1;
      case AtomKind::NonZero:
        if (!e.contains_zero()) return 1;
        if (e.lo == 0 && e.hi == 0) return 0;
        return -1;
    }
    return -1;
  }

  signed char eval_atom(const Atom& at, const std::vector<Interval>& box) const {
    if (at.constant) return *at.constant ? 1 : 0;
    Interval e = at.natural(box.data());
    signed char d = decide(at.kind, e);
    if (d >= 0 || !at.factored) return d;
    e = intersect(e, (*at.factored)(box.data()));
    d = decide(at.kind, e);
    if (d >= 0) return d;
    // centred mean-value form
    std::vector<Interval> centre(box.size());
    bool flat = true;
    for (size_t i = 0; i < box.size(); ++i) {
      centre[i] = Interval::point(box[i].mid());
      if (!box[i].is_point()) flat = false;
    }
    if (flat) return d;
    Interval mv = (*at.at_center)(centre.data());
    for (const auto& [i, prog] : at.gradient) mv = mv + prog(box.data()) * (box[i] - centre[i]);
    return decide(at.kind, intersect(e, mv));
  }

  signed char eval_node(int i, const std::vector<Interval>& box, State& st) const {
    if (st[i] >= 0) return st[i];
    const Node& n = nodes_[i];
    signed char r = -1;
    switch (n.kind) {
      case Node::True: r = 1; break;
      case Node::False: r = 0; break;
      case Node::Leaf: r = eval_atom(atoms_[n.atom], box); break;
      case Node::And: {
        signed char a = eval_node(n.a, box, st);
        if (a == 0) {
          r = 0;
          break;
        }
        signed char b = eval_node(n.b, box, st);
        r = b == 0 ? 0 : (a == 1 && b == 1 ? 1 : -1);
        break;
      }
      case Node::Or: {
        signed char a = eval_node(n.a, box, st);
        if (a == 1) {
          r = 1;
          break;
        }
        signed char b;
        std::vector<Interval> narrowed;
        if (a < 0 && st[n.b] < 0 && false_region(n.a, box, narrowed)) {
          // b only matters where a fails; its state is relative to that region
          if (narrowed.empty()) {
            r = 1;
            break;
          }
          b = eval_node(n.b, narrowed, st);
        } else {
          b = eval_node(n.b, box, st);
        }
        r = b == 1 ? 1 : (a == 0 && b == 0 ? 0 : -1);
        break;
      }
    }
    st[i] = r;
    return r;
  }

  // Box enclosing the points of `box` where node i is false, for nodes built from
  // one-variable linear atoms and disjunctions of them. Empty when no such point exists.
  bool false_region(int i, const std::vector<Interval>& box, std::vector<Interval>& out) const {
    const Node& n = nodes_[i];
    if (n.kind == Node::Leaf) {
      const auto& fr = atoms_[n.atom].false_region;
      if (!fr) return false;
      out = box;
      Interval& iv = out[fr->slot];
      iv = intersect(iv, Interval{fr->lo, fr->hi});
      if (iv.lo > iv.hi) out.clear();
      return true;
    }
    if (n.kind == Node::Or) {
      std::vector<Interval> first;
      if (!false_region(n.a, box, first)) return false;
      if (first.empty()) {
        out.clear();
        return true;
      }
      return false_region(n.b, first, out);
    }
    return false;
  }

  Formula original_, processed_;
  std::vector<Var> slots_;
  std::vector<Rational> lo_, hi_;
  std::vector<Node> nodes_;
  std::vector<Atom> atoms_;
  int root_ = -1;
  CompiledFormula point_check_;
};

struct Entry {
  std::vector<Interval> box;
  State state;
  std::optional<Problem::Result> result;
};

// Vertices of the rational box in lexicographic order (low before high).
std::optional<RatEnv> vertex_refutation(const Problem& pb) {
  const auto& slots = pb.slots();
  size_t n = std::min<size_t>(slots.size(), 10);
  std::vector<double> x(slots.size());
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    RatEnv p;
    for (size_t i = 0; i < slots.size(); ++i) {
      bool high = i < n && ((mask >> (n - 1 - i)) & 1);
      const Rational& q = high ? pb.rhi(i) : pb.rlo(i);
      p[slots[i]] = q;
      x[i] = to_double(q);
    }
    if (!pb.double_refutes(x)) continue;
    if (auto r = pb.refute_at(p)) return r;
  }
  return std::nullopt;
}

size_t widest(const std::vector<Interval>& box) {
  size_t best = 0;
  double w = -1;
  for (size_t i = 0; i < box.size(); ++i)
    if (box[i].width() > w) {
      w = box[i].width();
      best = i;
    }
  return best;
}

Verdict run(const Formula& f, const RationalBox& rbox, const ForallOptions& opts, bool parallel) {
  Problem pb(f, rbox);
  Verdict v;
  if (auto w = vertex_refutation(pb)) {
    v.kind = VerdictKind::Falsified;
    v.witness = w;
    v.report = "refuted at a box vertex";
    return v;
  }
  std::vector<Entry> stack;
  {
    Entry root;
    for (size_t i = 0; i < pb.slots().size(); ++i) root.box.push_back(Interval::of(pb.rlo(i), pb.rhi(i)));
    root.state.assign(pb.node_count(), -1);
    stack.push_back(std::move(root));
  }
  const int threads = std::max(1, opts.threads);
  const size_t lookahead = static_cast<size_t>(threads) * 4;
  double narrowest_open = rnd::kInf;
  while (!stack.empty()) {
    if (v.boxes >= opts.budget) {
      v.undecided += stack.size();
      v.kind = VerdictKind::Unknown;
      v.report = "budget of " + std::to_string(opts.budget) + " boxes exhausted with " +
                 std::to_string(v.undecided) + " boxes open";
      return v;
    }
    if (parallel && !stack.back().result) {
      // Speculatively evaluate the top of the stack; the serial order below is unchanged.
      std::vector<Entry*> todo;
      for (size_t k = stack.size(); k-- > 0 && todo.size() < lookahead;)
        if (!stack[k].result) todo.push_back(&stack[k]);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
      for (long k = 0; k < static_cast<long>(todo.size()); ++k)
        todo[k]->result = pb.evaluate(todo[k]->box, todo[k]->state);
    }
    Entry e = std::move(stack.back());
    stack.pop_back();
    ++v.boxes;
    Problem::Result r = e.result ? std::move(*e.result) : pb.evaluate(e.box, e.state);
    if (r.counterexample) {
      v.kind = VerdictKind::Falsified;
      v.witness = r.counterexample;
      v.report = "refuted after " + std::to_string(v.boxes) + " boxes";
      return v;
    }
    if (r.root == 1) continue;
    size_t d = widest(e.box);
    double width = e.box[d].width();
    if (width <= opts.min_width || r.root == 0) {
      ++v.undecided;
      narrowest_open = std::min(narrowest_open, width);
      continue;
    }
    double m = e.box[d].mid();
    Entry left{e.box, r.state, std::nullopt}, right{e.box, std::move(r.state), std::nullopt};
    left.box[d].hi = m;
    right.box[d].lo = m;
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  if (v.undecided == 0) {
    v.kind = VerdictKind::Valid;
    v.report = "certified with " + std::to_string(v.boxes) + " boxes";
  } else {
    v.kind = VerdictKind::Unknown;
    v.report = std::to_string(v.undecided) + " boxes could not be decided down to width " +
               std::to_string(narrowest_open);
  }
  return v;
}

}  // namespace

Verdict decide_forall_serial(const Formula& f, const RationalBox& box, const ForallOptions& opts) {
  return run(f, box, opts, false);
}

Verdict decide_forall_parallel(const Formula& f, const RationalBox& box, const ForallOptions& opts) {
  return run(f, box, opts, true);
}

Verdict decide_forall(const Formula& f, const RationalBox& box, const ForallOptions& opts) {
  return opts.threads > 1 ? decide_forall_parallel(f, box, opts) : decide_forall_serial(f, box, opts);
}

// --- exists-forall search ------------------------------------------------------------

namespace {

RationalBox merge(const RationalBox& a, const RationalBox& b) {
  RationalBox out = a;
  for (const auto& kv : b.bounds) out.bounds[kv.first] = kv.second;
  return out;
}

RationalBox point_box(const RatEnv& p) {
  RationalBox b;
  for (const auto& [v, q] : p) b.bounds[v] = {q, q};
  return b;
}

struct Search {
  const std::vector<Var>& y;
  const Formula& ydom;
  const Formula& f;
  const RationalBox& inner;
  const ExistsOptions& opts;
  std::vector<RatEnv> candidates;
  std::vector<RationalBox> y_boxes;
  size_t used = 0;

  size_t remaining() const { return used >= opts.budget ? 0 : opts.budget - used; }

  Verdict check(const RationalBox& b, size_t budget) {
    ForallOptions fo;
    fo.budget = std::min(budget, remaining());
    fo.threads = opts.threads;
    Verdict v = decide_forall(f, b, fo);
    used += v.boxes;
    return v;
  }

  std::optional<RationalBox> find(const RationalBox& outer) {
    RationalBox base = merge(outer, inner);
    std::vector<size_t> retry;
    // quick pass drops refuted and easy candidates
    for (size_t i = 0; i < candidates.size() && remaining() > 0; ++i) {
      Verdict v = check(merge(base, point_box(candidates[i])), std::min<size_t>(2000, opts.candidate_budget));
      if (v.kind == VerdictKind::Valid) return point_box(candidates[i]);
      if (v.kind == VerdictKind::Unknown) retry.push_back(i);
    }
    for (size_t i : retry) {
      if (remaining() == 0) break;
      Verdict v = check(merge(base, point_box(candidates[i])), opts.candidate_budget);
      if (v.kind == VerdictKind::Valid) return point_box(candidates[i]);
    }
    for (const auto& yb : y_boxes) {
      if (remaining() == 0) break;
      Verdict v = check(merge(base, yb), opts.candidate_budget);
      if (v.kind == VerdictKind::Valid) return yb;
    }
    return std::nullopt;
  }

  bool solve(const RationalBox& outer, int depth, std::vector<WitnessPiece>& pieces) {
    if (auto w = find(outer)) {
      pieces.push_back({outer, *w});
      return true;
    }
    if (depth <= 0 || remaining() == 0 || outer.bounds.empty()) return false;
    Var widest_var;
    Rational best = -1;
    for (const auto& [v, lh] : outer.bounds)
      if (lh.second - lh.first > best) {
        best = lh.second - lh.first;
        widest_var = v;
      }
    if (best <= 0) return false;
    auto [lo, hi] = outer.bounds.at(widest_var);
    Rational mid = (lo + hi) / 2;
    RationalBox a = outer, b = outer;
    a.bounds[widest_var].second = mid;
    b.bounds[widest_var].first = mid;
    return solve(a, depth - 1, pieces) && solve(b, depth - 1, pieces);
  }
};

// Sub-boxes of the y bounding box on which the domain provably holds.
std::vector<RationalBox> witness_boxes(const std::vector<Var>& y, const Formula& ydom,
                                       const std::map<Var, std::pair<Rational, Rational>>& bbox, int depth) {
  std::vector<RationalBox> out;
  size_t dims = y.size();
  for (int level = 1; level <= depth; ++level) {
    size_t per = size_t{1} << level;
    size_t count = 1;
    for (size_t i = 0; i < dims; ++i) count *= per;
    if (count > 256) break;
    for (size_t k = 0; k < count; ++k) {
      RationalBox b;
      size_t rest = k;
      for (size_t i = 0; i < dims; ++i) {
        size_t j = rest % per;
        rest /= per;
        auto [lo, hi] = bbox.at(y[i]);
        Rational step = (hi - lo) / Rational(static_cast<long>(per));
        b.bounds[y[i]] = {lo + step * static_cast<long>(j), lo + step * static_cast<long>(j + 1)};
      }
      ForallOptions fo;
      fo.budget = 2000;
      if (decide_forall(ydom, b, fo).kind == VerdictKind::Valid) out.push_back(b);
    }
  }
  return out;
}

}  // namespace

ExistsForallResult search_exists_forall(const std::vector<Var>& y, const Formula& ydom, const Formula& f,
                                        const RationalBox& outer, const RationalBox& inner,
                                        const ExistsOptions& opts) {
  ExistsForallResult res;
  Search s{y, ydom, f, inner, opts, {}, {}, 0};
  if (y.empty()) {
    s.candidates.push_back({});
  } else {
    ControlShape shape = analyse_controls(y, ydom);
    if (!shape.compact || (shape.box.empty() && !shape.finite_points))
      throw EvalError("witness domain is not a recognized compact set: " + print(ydom));
    s.candidates = sample_controls(y, ydom, opts.resolution);
    if (!shape.finite_points) s.y_boxes = witness_boxes(y, ydom, shape.box, opts.y_box_depth);
  }
  bool ok = s.solve(outer, opts.outer_splits, res.pieces);
  res.verdict.boxes = s.used;
  if (ok) {
    res.verdict.kind = VerdictKind::Valid;
    res.verdict.report = "witness found for " + std::to_string(res.pieces.size()) + " piece(s) after " +
                         std::to_string(s.used) + " boxes";
  } else {
    res.pieces.clear();
    res.verdict.kind = VerdictKind::Unknown;
    res.verdict.report = "no witness certified among " + std::to_string(s.candidates.size()) +
                         " candidate points and " + std::to_string(s.y_boxes.size()) + " boxes (" +
                         std::to_string(s.used) + " boxes spent)";
  }
  return res;
}

}  // namespace dhg
