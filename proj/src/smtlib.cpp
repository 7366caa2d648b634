#include <cstdio>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "dhg/arith.hpp"
#include "dhg/vars.hpp"

namespace dhg {

std::string smt_symbol(const Var& v) {
  if (v.index == 0) return v.name;
  return "|" + v.name + "[" + std::to_string(v.index) + "]|";
}

namespace {

std::string smt_const(const Rational& q) {
  Rational a = abs(q);
  std::string body = a.get_den() == 1 ? a.get_num().get_str()
                                      : "(/ " + a.get_num().get_str() + " " + a.get_den().get_str() + ")";
  return q < 0 ? "(- " + body + ")" : body;
}

struct SqrtDef {
  Var s;
  Term arg;
};

class Exporter {
 public:
  explicit Exporter(const Formula& f) : avoid_(all_vars(f)), free_(free_vars(f)) {}

  std::string formula(const Formula& f, const VarSet& bound) {
    switch (f->kind) {
      case FormulaKind::True: return "true";
      case FormulaKind::False: return "false";
      case FormulaKind::Cmp: return atom(f, bound);
      case FormulaKind::Not: return "(not " + formula(f->a, bound) + ")";
      case FormulaKind::And: return nary("and", FormulaKind::And, f, bound);
      case FormulaKind::Or: return nary("or", FormulaKind::Or, f, bound);
      case FormulaKind::Imply: return "(=> " + formula(f->a, bound) + " " + formula(f->b, bound) + ")";
      case FormulaKind::Equiv: return "(= " + formula(f->a, bound) + " " + formula(f->b, bound) + ")";
      case FormulaKind::Forall:
      case FormulaKind::Exists: {
        VarSet inner = bound;
        inner.insert(f->bound);
        std::string q = f->kind == FormulaKind::Forall ? "forall" : "exists";
        return "(" + q + " ((" + smt_symbol(f->bound) + " Real)) " + formula(f->a, inner) + ")";
      }
      case FormulaKind::Box:
      case FormulaKind::Diamond: throw EvalError("SMT-LIB export needs a modality-free formula");
    }
    return "";
  }

  const std::vector<SqrtDef>& globals() const { return globals_; }

 private:
  std::string nary(const char* op, FormulaKind k, const Formula& f, const VarSet& bound) {
    std::vector<Formula> parts;
    std::function<void(const Formula&)> flat = [&](const Formula& g) {
      if (g->kind == k) {
        flat(g->a);
        flat(g->b);
      } else {
        parts.push_back(g);
      }
    };
    flat(f);
    std::string s = std::string("(") + op;
    for (const auto& p : parts) s += " " + formula(p, bound);
    return s + ")";
  }

  std::string atom(const Formula& f, const VarSet& bound) {
    std::vector<SqrtDef> local;
    std::string l = term(f->lhs, bound, local), r = term(f->rhs, bound, local);
    std::string body;
    switch (f->op) {
      case CmpOp::Ge: body = "(>= " + l + " " + r + ")"; break;
      case CmpOp::Gt: body = "(> " + l + " " + r + ")"; break;
      case CmpOp::Eq: body = "(= " + l + " " + r + ")"; break;
      case CmpOp::Le: body = "(<= " + l + " " + r + ")"; break;
      case CmpOp::Lt: body = "(< " + l + " " + r + ")"; break;
      case CmpOp::Ne: body = "(not (= " + l + " " + r + "))"; break;
    }
    // sqrt of quantified arguments: exists s >= 0 with s*s = arg, local to the atom
    for (size_t i = local.size(); i-- > 0;) {
      std::string s = smt_symbol(local[i].s);
      std::vector<SqrtDef> none;
      std::string arg = term(local[i].arg, bound, none);
      body = "(exists ((" + s + " Real)) (and (>= " + s + " 0) (= (* " + s + " " + s + ") " + arg + ") " + body + "))";
    }
    return body;
  }

  Var fresh() {
    Var v = fresh_var("s", avoid_);
    avoid_.insert(v);
    return v;
  }

  std::string nary_term(const char* op, TermKind k, const Term& t, const VarSet& bound, std::vector<SqrtDef>& local) {
    std::vector<Term> parts;
    std::function<void(const Term&)> flat = [&](const Term& g) {
      if (g->kind == k) {
        flat(g->a);
        flat(g->b);
      } else {
        parts.push_back(g);
      }
    };
    flat(t);
    std::string s = std::string("(") + op;
    for (const auto& p : parts) s += " " + term(p, bound, local);
    return s + ")";
  }

  std::string term(const Term& t, const VarSet& bound, std::vector<SqrtDef>& local) {
    switch (t->kind) {
      case TermKind::Const: return smt_const(t->value);
      case TermKind::Var: return smt_symbol(t->var);
      case TermKind::Diff: throw EvalError("differential symbols cannot be exported");
      case TermKind::Neg: return "(- " + term(t->a, bound, local) + ")";
      case TermKind::Add: return nary_term("+", TermKind::Add, t, bound, local);
      case TermKind::Mul: return nary_term("*", TermKind::Mul, t, bound, local);
      case TermKind::Pow: {
        std::string a = term(t->a, bound, local);
        if (t->exp == 1) return a;
        std::string s = "(*";
        for (unsigned i = 0; i < t->exp; ++i) s += " " + a;
        return s + ")";
      }
      case TermKind::Min:
      case TermKind::Max: {
        std::string a = term(t->a, bound, local), b = term(t->b, bound, local);
        return "(ite (" + std::string(t->kind == TermKind::Min ? "<=" : ">=") + " " + a + " " + b + ") " + a + " " + b + ")";
      }
      case TermKind::Div: return "(/ " + term(t->a, bound, local) + " " + term(t->b, bound, local) + ")";
      case TermKind::Sqrt: {
        bool is_local = false;
        for (const Var& v : free_vars(t->a))
          if (bound.count(v)) is_local = true;
        auto& defs = is_local ? local : globals_;
        for (const auto& d : defs)
          if (equal(d.arg, t->a)) return smt_symbol(d.s);
        if (!is_local)
          for (const auto& d : globals_)
            if (equal(d.arg, t->a)) return smt_symbol(d.s);
        Var s = fresh();
        defs.push_back({s, t->a});
        return smt_symbol(s);
      }
    }
    return "";
  }

 public:
  std::string global_term(const Term& t) {
    std::vector<SqrtDef> none;
    return term(t, {}, none);
  }

 private:
  VarSet avoid_, free_;
  std::vector<SqrtDef> globals_;
};

}  // namespace

std::string export_smtlib(const Formula& f, const std::string& logic) {
  Exporter ex(f);
  std::string body = ex.formula(f, {});
  std::ostringstream out;
  out << "; unsat means the formula is valid\n";
  out << "(set-logic " << logic << ")\n";
  // printing a global sqrt argument may introduce further globals
  std::vector<std::string> args;
  for (size_t i = 0; i < ex.globals().size(); ++i) args.push_back(ex.global_term(ex.globals()[i].arg));
  VarSet decls = free_vars(f);
  for (const auto& d : ex.globals()) decls.insert(d.s);
  for (const Var& v : decls) out << "(declare-fun " << smt_symbol(v) << " () Real)\n";
  for (size_t i = 0; i < args.size(); ++i) {
    std::string s = smt_symbol(ex.globals()[i].s);
    out << "(assert (>= " << s << " 0))\n";
    out << "(assert (= (* " << s << " " << s << ") " << args[i] << "))\n";
  }
  out << "(assert (not " << body << "))\n";
  out << "(check-sat)\n";
  return out.str();
}

// --- external solver -------------------------------------------------------------

namespace {

std::optional<std::string> solver_path() {
  if (const char* env = std::getenv("DHG_Z3")) {
    if (*env == 0) return std::nullopt;
    return std::string(env);
  }
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    std::filesystem::path p = std::filesystem::path(dir) / "z3";
    if (access(p.c_str(), X_OK) == 0) return p.string();
  }
  return std::nullopt;
}

}  // namespace

bool external_solver_available() { return solver_path().has_value(); }

SolverResult run_external_solver(const std::string& script, double timeout_seconds) {
  SolverResult res;
  auto exe = solver_path();
  if (!exe) return res;
  char name[] = "/tmp/dhg-smt-XXXXXX";
  int fd = mkstemp(name);
  if (fd < 0) return res;
  close(fd);
  {
    std::ofstream o(name);
    o << script;
  }
  int secs = std::max(1, static_cast<int>(timeout_seconds + 0.999));
  std::string cmd = "'" + *exe + "' -smt2 -T:" + std::to_string(secs) + " '" + name + "' 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    std::remove(name);
    return res;
  }
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, p)) res.output.append(buf, n);
  pclose(p);
  std::remove(name);
  std::string first = res.output.substr(0, res.output.find('\n'));
  if (first == "unsat")
    res.answer = SolverAnswer::Unsat;
  else if (first == "sat")
    res.answer = SolverAnswer::Sat;
  else
    res.answer = SolverAnswer::Unknown;
  return res;
}

}  // namespace dhg
