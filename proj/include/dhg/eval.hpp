#pragma once
// Point evaluation of terms and first-order formulas: exact and floating.

#include <functional>
#include <map>
#include <optional>

#include "dhg/ast.hpp"

namespace dhg {

using RatEnv = std::map<Var, Rational>;
using DblEnv = std::map<Var, double>;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// nullopt when the value is irrational (sqrt of a non-square) or undefined.
std::optional<Rational> eval_exact(const Term& t, const RatEnv& env);
// Constant term (no variables) to a rational, if exact.
std::optional<Rational> const_value(const Term& t);

// Three-valued exact truth of a quantifier-free, modality-free formula.
std::optional<bool> holds_exact(const Formula& f, const RatEnv& env);

double eval_double(const Term& t, const DblEnv& env);
bool holds_double(const Formula& f, const DblEnv& env);

bool compare_values(CmpOp op, const Rational& a, const Rational& b);
bool compare_values(CmpOp op, double a, double b);

// Flattened term over a fixed slot layout, for hot loops.
class CompiledTerm {
 public:
  CompiledTerm() = default;
  CompiledTerm(const Term& t, const std::vector<Var>& slots);
  double operator()(const double* x) const;

 private:
  enum class Op : unsigned char { Const, Load, Neg, Add, Mul, Pow, Min, Max, Div, Sqrt };
  struct Instr {
    Op op;
    unsigned arg = 0;
    double value = 0;
  };
  void emit(const Term& t, const std::vector<Var>& slots);
  std::vector<Instr> code_;
  size_t depth_ = 0, cur_ = 0;
};

// Quantifier-free formula compiled against the same slot layout.
class CompiledFormula {
 public:
  CompiledFormula() = default;
  CompiledFormula(const Formula& f, const std::vector<Var>& slots);
  bool operator()(const double* x) const;

 private:
  struct Node {
    FormulaKind kind;
    CmpOp op;
    int lhs = -1, rhs = -1;  // term indices
    int a = -1, b = -1;      // node indices
  };
  int build(const Formula& f, const std::vector<Var>& slots);
  bool eval(int node, const double* x) const;
  std::vector<Node> nodes_;
  std::vector<CompiledTerm> terms_;
  int root_ = -1;
};

}  // namespace dhg
