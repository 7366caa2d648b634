#include "dhg/eval.hpp"

#include <algorithm>
#include <cmath>

namespace dhg {

bool compare_values(CmpOp op, const Rational& a, const Rational& b) {
  switch (op) {
    case CmpOp::Ge: return a >= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Ne: return a != b;
  }
  return false;
}

bool compare_values(CmpOp op, double a, double b) {
  switch (op) {
    case CmpOp::Ge: return a >= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Ne: return a != b;
  }
  return false;
}

std::optional<Rational> eval_exact(const Term& t, const RatEnv& env) {
  switch (t->kind) {
    case TermKind::Const: return t->value;
    case TermKind::Var: {
      auto it = env.find(t->var);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case TermKind::Diff: return std::nullopt;
    case TermKind::Neg: {
      auto a = eval_exact(t->a, env);
      if (!a) return std::nullopt;
      return Rational(-*a);
    }
    case TermKind::Pow: {
      auto a = eval_exact(t->a, env);
      if (!a) return std::nullopt;
      return rational_pow(*a, t->exp);
    }
    case TermKind::Sqrt: {
      auto a = eval_exact(t->a, env);
      if (!a) return std::nullopt;
      return rational_sqrt(*a);
    }
    default: break;
  }
  auto a = eval_exact(t->a, env);
  if (!a) return std::nullopt;
  auto b = eval_exact(t->b, env);
  if (!b) return std::nullopt;
  switch (t->kind) {
    case TermKind::Add: return Rational(*a + *b);
    case TermKind::Mul: return Rational(*a * *b);
    case TermKind::Min: return std::min(*a, *b);
    case TermKind::Max: return std::max(*a, *b);
    case TermKind::Div:
      if (*b == 0) return std::nullopt;
      return Rational(*a / *b);
    default: return std::nullopt;
  }
}

std::optional<Rational> const_value(const Term& t) { return eval_exact(t, {}); }

std::optional<bool> holds_exact(const Formula& f, const RatEnv& env) {
  switch (f->kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Cmp: {
      auto a = eval_exact(f->lhs, env), b = eval_exact(f->rhs, env);
      if (!a || !b) return std::nullopt;
      return compare_values(f->op, *a, *b);
    }
    case FormulaKind::Not: {
      auto a = holds_exact(f->a, env);
      if (!a) return std::nullopt;
      return !*a;
    }
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imply:
    case FormulaKind::Equiv: {
      auto a = holds_exact(f->a, env), b = holds_exact(f->b, env);
      switch (f->kind) {
        case FormulaKind::And:
          if ((a && !*a) || (b && !*b)) return false;
          if (a && b) return true;
          return std::nullopt;
        case FormulaKind::Or:
          if ((a && *a) || (b && *b)) return true;
          if (a && b) return false;
          return std::nullopt;
        case FormulaKind::Imply:
          if ((a && !*a) || (b && *b)) return true;
          if (a && b) return false;
          return std::nullopt;
        default:
          if (!a || !b) return std::nullopt;
          return *a == *b;
      }
    }
    default: throw EvalError("cannot evaluate quantifiers or modalities at a point");
  }
}

double eval_double(const Term& t, const DblEnv& env) {
  switch (t->kind) {
    case TermKind::Const: return to_double(t->value);
    case TermKind::Var: {
      auto it = env.find(t->var);
      if (it == env.end()) throw EvalError("unbound variable " + to_string(t->var));
      return it->second;
    }
    case TermKind::Diff: throw EvalError("cannot evaluate a differential symbol");
    case TermKind::Neg: return -eval_double(t->a, env);
    case TermKind::Pow: return std::pow(eval_double(t->a, env), static_cast<double>(t->exp));
    case TermKind::Sqrt: return std::sqrt(eval_double(t->a, env));
    case TermKind::Add: return eval_double(t->a, env) + eval_double(t->b, env);
    case TermKind::Mul: return eval_double(t->a, env) * eval_double(t->b, env);
    case TermKind::Min: return std::min(eval_double(t->a, env), eval_double(t->b, env));
    case TermKind::Max: return std::max(eval_double(t->a, env), eval_double(t->b, env));
    case TermKind::Div: return eval_double(t->a, env) / eval_double(t->b, env);
  }
  return 0;
}

bool holds_double(const Formula& f, const DblEnv& env) {
  switch (f->kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Cmp:
      return compare_values(f->op, eval_double(f->lhs, env), eval_double(f->rhs, env));
    case FormulaKind::Not: return !holds_double(f->a, env);
    case FormulaKind::And: return holds_double(f->a, env) && holds_double(f->b, env);
    case FormulaKind::Or: return holds_double(f->a, env) || holds_double(f->b, env);
    case FormulaKind::Imply: return !holds_double(f->a, env) || holds_double(f->b, env);
    case FormulaKind::Equiv: return holds_double(f->a, env) == holds_double(f->b, env);
    default: throw EvalError("cannot evaluate quantifiers or modalities at a point");
  }
}

// --- compiled terms -----------------------------------------------------------

CompiledTerm::CompiledTerm(const Term& t, const std::vector<Var>& slots) {
  emit(t, slots);
  if (depth_ > 64) throw EvalError("term too deep to compile");
}

void CompiledTerm::emit(const Term& t, const std::vector<Var>& slots) {
  auto push = [&](Instr in) {
    code_.push_back(in);
    depth_ = std::max(depth_, ++cur_);
  };
  switch (t->kind) {
    case TermKind::Const: push({Op::Const, 0, to_double(t->value)}); return;
    case TermKind::Var: {
      auto it = std::find(slots.begin(), slots.end(), t->var);
      if (it == slots.end()) throw EvalError("unbound variable " + to_string(t->var));
      push({Op::Load, static_cast<unsigned>(it - slots.begin()), 0});
      return;
    }
    case TermKind::Diff: throw EvalError("cannot compile a differential symbol");
    case TermKind::Neg: emit(t->a, slots); code_.push_back({Op::Neg}); return;
    case TermKind::Sqrt: emit(t->a, slots); code_.push_back({Op::Sqrt}); return;
    case TermKind::Pow: emit(t->a, slots); code_.push_back({Op::Pow, t->exp}); return;
    default: break;
  }
  emit(t->a, slots);
  emit(t->b, slots);
  Op op = Op::Add;
  switch (t->kind) {
    case TermKind::Add: op = Op::Add; break;
    case TermKind::Mul: op = Op::Mul; break;
    case TermKind::Min: op = Op::Min; break;
    case TermKind::Max: op = Op::Max; break;
    case TermKind::Div: op = Op::Div; break;
    default: break;
  }
  code_.push_back({op});
  --cur_;
}

double CompiledTerm::operator()(const double* x) const {
  double stack[64];
  int sp = -1;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: stack[++sp] = in.value; break;
      case Op::Load: stack[++sp] = x[in.arg]; break;
      case Op::Neg: stack[sp] = -stack[sp]; break;
      case Op::Sqrt: stack[sp] = std::sqrt(stack[sp]); break;
      case Op::Pow: {
        double b = stack[sp], r = b;
        for (unsigned k = 1; k < in.arg; ++k) r *= b;
        stack[sp] = r;
        break;
      }
      case Op::Add: stack[sp - 1] += stack[sp]; --sp; break;
      case Op::Mul: stack[sp - 1] *= stack[sp]; --sp; break;
      case Op::Min: stack[sp - 1] = std::min(stack[sp - 1], stack[sp]); --sp; break;
      case Op::Max: stack[sp - 1] = std::max(stack[sp - 1], stack[sp]); --sp; break;
      case Op::Div: stack[sp - 1] /= stack[sp]; --sp; break;
    }
  }
  return stack[0];
}

CompiledFormula::CompiledFormula(const Formula& f, const std::vector<Var>& slots) {
  root_ = build(f, slots);
}

int CompiledFormula::build(const Formula& f, const std::vector<Var>& slots) {
  Node n{f->kind, f->op};
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: break;
    case FormulaKind::Cmp:
      terms_.emplace_back(f->lhs, slots);
      n.lhs = static_cast<int>(terms_.size()) - 1;
      terms_.emplace_back(f->rhs, slots);
      n.rhs = static_cast<int>(terms_.size()) - 1;
      break;
    case FormulaKind::Not: n.a = build(f->a, slots); break;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imply:
    case FormulaKind::Equiv:
      n.a = build(f->a, slots);
      n.b = build(f->b, slots);
      break;
    default: throw EvalError("cannot compile quantifiers or modalities");
  }
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

bool CompiledFormula::eval(int i, const double* x) const {
  const Node& n = nodes_[i];
  switch (n.kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Cmp: return compare_values(n.op, terms_[n.lhs](x), terms_[n.rhs](x));
    case FormulaKind::Not: return !eval(n.a, x);
    case FormulaKind::And: return eval(n.a, x) && eval(n.b, x);
    case FormulaKind::Or: return eval(n.a, x) || eval(n.b, x);
    case FormulaKind::Imply: return !eval(n.a, x) || eval(n.b, x);
    case FormulaKind::Equiv: return eval(n.a, x) == eval(n.b, x);
    default: return false;
  }
}

bool CompiledFormula::operator()(const double* x) const { return eval(root_, x); }

}  // namespace dhg
