#include "dhg/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "dhg/vars.hpp"

namespace dhg {

ParseError::ParseError(const std::string& msg, int l, int c)
    : SyntaxError(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), col(c) {}

namespace {

const std::set<std::string> kReserved = {"d",   "in",  "forall", "exists", "true",  "false",
                                         "min", "max", "sqrt",   "normSq", "dot",   "perp"};

enum class Tok { Num, Ident, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

std::vector<Token> lex(std::string_view src) {
  static const char* kSyms[] = {"<->", "->", ":=", "++", ">=", "<=", "!=", "(", ")", "[",
                                "]",   "{",  "}",  ",",  ";",  "'",  "=",  ">", "<", "+",
                                "-",   "*",  "/",  "^",  "&",  "|",  "!",  "?", ":"};
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Num, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' ||
                                src[j] == '$'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* s : kSyms) {
      std::string_view sv(s);
      if (src.substr(i, sv.size()) == sv) {
        out.push_back({Tok::Sym, std::string(sv), l, cl});
        advance(sv.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

using VT = std::vector<Term>;

class Parser {
 public:
  Parser(std::string_view src, const ParseContext& ctx) : toks_(lex(src)), ctx_(ctx) {}

  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
  }

  // --- tokens ---------------------------------------------------------------
  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool is_sym(const char* s, size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool is_ident(const char* s, size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  bool accept(const char* s) {
    if (is_sym(s)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const char* s) {
    if (!accept(s)) fail(std::string("expected '") + s + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : ""), t.line, t.col);
  }

  // --- variables ------------------------------------------------------------
  bool at_var() const {
    return peek().kind == Tok::Ident && !kReserved.count(peek().text) &&
           !ctx_.abbreviations.count(peek().text) && !ctx_.formulas.count(peek().text);
  }

  std::vector<Var> var_components() {
    if (!at_var()) fail("expected a variable");
    std::string name = peek().text;
    ++pos_;
    if (is_sym("[") && peek(1).kind == Tok::Num && is_sym("]", 2)) {
      int idx = std::stoi(peek(1).text);
      if (idx < 1) fail("vector index must be positive");
      pos_ += 3;
      return {Var{name, idx}};
    }
    auto it = ctx_.vectors.find(name);
    if (it == ctx_.vectors.end()) return {Var{name, 0}};
    std::vector<Var> out;
    for (int i = 1; i <= it->second; ++i) out.push_back(Var{name, i});
    return out;
  }

  // --- terms ----------------------------------------------------------------
  static Term scalar_of(const VT& v, const Parser& p, const char* what) {
    if (v.size() != 1) p.fail(std::string(what) + " expects a scalar, got a vector");
    return v[0];
  }

  VT term() {
    VT acc = product();
    for (;;) {
      if (accept("+")) {
        VT rhs = product();
        acc = zip(acc, rhs, [](Term a, Term b) { return mk_add(a, b); });
      } else if (is_sym("-")) {
        ++pos_;
        VT rhs = product();
        acc = zip(acc, rhs, [](Term a, Term b) { return mk_sub(a, b); });
      } else {
        return acc;
      }
    }
  }

  template <class F>
  VT zip(const VT& a, const VT& b, F f) {
    if (a.size() != b.size()) fail("vector dimensions differ");
    VT out;
    for (size_t i = 0; i < a.size(); ++i) out.push_back(f(a[i], b[i]));
    return out;
  }

  VT product() {
    VT acc = unary();
    for (;;) {
      if (accept("*")) {
        VT rhs = unary();
        if (acc.size() == 1) {
          VT out;
          for (auto& t : rhs) out.push_back(mk_mul(acc[0], t));
          acc = out;
        } else if (rhs.size() == 1) {
          for (auto& t : acc) t = mk_mul(t, rhs[0]);
        } else {
          fail("product of two vectors; use dot(u, v)");
        }
      } else if (is_sym("/")) {
        if (!ctx_.allow_witness) fail("division is only allowed in witness terms");
        ++pos_;
        Term den = scalar_of(unary(), *this, "division");
        for (auto& t : acc) t = mk_div(t, den);
      } else {
        return acc;
      }
    }
  }

  // literal: NUM ['/' NUM], folded unless an exponent follows
  bool at_literal() const { return peek().kind == Tok::Num; }

  Rational literal() {
    Rational q = parse_rational(peek().text);
    ++pos_;
    if (is_sym("/") && peek(1).kind == Tok::Num && !is_sym("^", 2)) {
      Rational d = parse_rational(peek(1).text);
      if (d == 0) fail("zero denominator");
      q /= d;
      pos_ += 2;
    }
    return q;
  }

  bool literal_folds() const {
    // NUM not followed by ^, or NUM/NUM not followed by ^
    if (peek().kind != Tok::Num) return false;
    if (is_sym("^", 1)) return false;
    if (is_sym("/", 1) && peek(2).kind == Tok::Num) return !is_sym("^", 3);
    return true;
  }

  VT unary() {
    if (is_sym("-")) {
      ++pos_;
      if (literal_folds()) {
        Rational q = literal();
        return {mk_const(Rational(-q))};
      }
      VT v = unary();
      for (auto& t : v) t = mk_neg(t);
      return v;
    }
    return power();
  }

  VT power() {
    VT base = primary();
    while (accept("^")) {
      if (peek().kind != Tok::Num) fail("exponent must be a natural number");
      long e = std::stol(peek().text);
      if (peek().text.find('.') != std::string::npos || e < 1) fail("exponent must be a natural number >= 1");
      ++pos_;
      base = {mk_pow(scalar_of(base, *this, "power"), static_cast<unsigned>(e))};
    }
    return base;
  }

  VT call_args(size_t n) {
    expect("(");
    VT args;
    for (size_t i = 0; i < n; ++i) {
      if (i) expect(",");
      VT a = term();
      args.insert(args.end(), a.begin(), a.end());
      if (args.size() != i + 1) fail("argument must be a scalar");
    }
    expect(")");
    return args;
  }

  std::vector<VT> vec_args(size_t n) {
    expect("(");
    std::vector<VT> args;
    for (size_t i = 0; i < n; ++i) {
      if (i) expect(",");
      args.push_back(term());
    }
    expect(")");
    return args;
  }

  VT primary() {
    const Token& t = peek();
    if (t.kind == Tok::Num) return {mk_const(literal())};
    if (t.kind == Tok::Sym && t.text == "(") {
      ++pos_;
      VT first = term();
      if (accept(",")) {
        VT out = {scalar_of(first, *this, "vector literal")};
        do {
          out.push_back(scalar_of(term(), *this, "vector literal"));
        } while (accept(","));
        expect(")");
        return out;
      }
      expect(")");
      return first;
    }
    if (t.kind != Tok::Ident) fail("expected a term");
    const std::string& name = t.text;
    if (name == "min" || name == "max") {
      ++pos_;
      VT a = call_args(2);
      return {name == "min" ? mk_min(a[0], a[1]) : mk_max(a[0], a[1])};
    }
    if (name == "sqrt") {
      if (!ctx_.allow_witness) fail("sqrt is only allowed in witness terms");
      ++pos_;
      return {mk_sqrt(call_args(1)[0])};
    }
    if (name == "normSq") {
      ++pos_;
      VT v = vec_args(1)[0];
      Term acc;
      for (auto& c : v) acc = acc ? mk_add(acc, mk_pow(c, 2)) : mk_pow(c, 2);
      return {acc};
    }
    if (name == "dot") {
      ++pos_;
      auto args = vec_args(2);
      if (args[0].size() != args[1].size()) fail("dot of vectors with different dimensions");
      Term acc;
      for (size_t i = 0; i < args[0].size(); ++i) {
        Term p = mk_mul(args[0][i], args[1][i]);
        acc = acc ? mk_add(acc, p) : p;
      }
      return {acc};
    }
    if (name == "perp") {
      ++pos_;
      VT v = vec_args(1)[0];
      if (v.size() != 2) fail("perp expects a 2-vector");
      return {mk_neg(v[1]), v[0]};
    }
    if (auto it = ctx_.abbreviations.find(name); it != ctx_.abbreviations.end()) {
      ++pos_;
      return it->second;
    }
    if (kReserved.count(name)) fail("unexpected keyword '" + name + "'");
    std::vector<Var> comps = var_components();
    VT out;
    if (accept("'")) {
      for (auto& v : comps) out.push_back(mk_diff(v));
      if (!ctx_.allow_diff && !in_ode_lhs_) fail("differential symbol outside a differential game");
    } else {
      for (auto& v : comps) out.push_back(mk_var(v));
    }
    return out;
  }

  // --- formulas -------------------------------------------------------------
  Formula formula() { return equiv(); }

  Formula equiv() {
    Formula acc = imply();
    while (accept("<->")) acc = mk_equiv(acc, imply());
    return acc;
  }

  Formula imply() {
    Formula lhs = disj();
    if (accept("->")) return mk_imply(lhs, imply());
    return lhs;
  }

  Formula disj() {
    Formula acc = conj();
    while (accept("|")) acc = mk_or(acc, conj());
    return acc;
  }

  Formula conj() {
    Formula acc = funary();
    while (accept("&")) acc = mk_and(acc, funary());
    return acc;
  }

  Formula funary() {
    if (accept("!")) return mk_not(funary());
    if (is_ident("forall") || is_ident("exists")) {
      bool all = peek().text == "forall";
      ++pos_;
      std::vector<Var> vs = var_components();
      Formula body = funary();
      for (auto it = vs.rbegin(); it != vs.rend(); ++it)
        body = all ? mk_forall(*it, body) : mk_exists(*it, body);
      return body;
    }
    if (accept("[")) {
      Game g = game();
      expect("]");
      return mk_box(g, funary());
    }
    if (accept("<")) {
      Game g = game();
      expect(">");
      return mk_diamond(g, funary());
    }
    return fprimary();
  }

  Formula fprimary() {
    if (is_ident("true")) {
      ++pos_;
      return mk_true();
    }
    if (is_ident("false")) {
      ++pos_;
      return mk_false();
    }
    if (peek().kind == Tok::Ident) {
      if (auto it = ctx_.formulas.find(peek().text); it != ctx_.formulas.end()) {
        ++pos_;
        return it->second;
      }
    }
    if (is_sym("(") && !failed_paren_.count(pos_)) {
      size_t save = pos_;
      try {
        ++pos_;
        Formula f = formula();
        expect(")");
        return f;
      } catch (const ParseError&) {
        failed_paren_.insert(save);
        pos_ = save;
      }
    }
    return comparison();
  }

  Formula comparison() {
    VT lhs = term();
    if (is_ident("in")) {
      ++pos_;
      return membership(lhs);
    }
    static const std::pair<const char*, CmpOp> ops[] = {
        {">=", CmpOp::Ge}, {">", CmpOp::Gt}, {"=", CmpOp::Eq},
        {"<=", CmpOp::Le}, {"<", CmpOp::Lt}, {"!=", CmpOp::Ne}};
    for (const auto& [s, op] : ops) {
      if (accept(s)) {
        VT rhs = term();
        if (lhs.size() != 1 || rhs.size() != 1) fail("comparison of vectors");
        return mk_cmp(op, lhs[0], rhs[0]);
      }
    }
    fail("expected a comparison operator");
  }

  Formula membership(const VT& subject) {
    if (accept("[")) {
      Term lo = scalar_of(term(), *this, "interval bound");
      expect(",");
      Term hi = scalar_of(term(), *this, "interval bound");
      expect("]");
      std::vector<Formula> parts;
      for (const auto& s : subject) {
        parts.push_back(mk_cmp(CmpOp::Le, lo, s));
        parts.push_back(mk_cmp(CmpOp::Le, s, hi));
      }
      return mk_and_all(parts);
    }
    if (peek().kind == Tok::Ident) {
      auto it = ctx_.sets.find(peek().text);
      if (it == ctx_.sets.end()) fail("unknown set '" + peek().text + "'");
      ++pos_;
      ParseContext sub = ctx_;
      sub.abbreviations[it->second.param] = subject;
      sub.vectors.erase(it->second.param);
      Parser p(it->second.body, sub);
      Formula f = p.formula();
      p.expect_end();
      return f;
    }
    fail("expected an interval [a, b] or a set name");
  }

  // --- games ----------------------------------------------------------------
  Game game() {
    Game acc = seq();
    while (accept("++")) acc = mk_choice(acc, seq());
    return acc;
  }

  Game seq() {
    Game acc = gpostfix();
    while (accept(";")) acc = mk_seq(acc, gpostfix());
    return acc;
  }

  Game gpostfix() {
    Game g = gatom();
    for (;;) {
      if (accept("*")) {
        g = mk_repeat(g);
      } else if (is_sym("^") && is_ident("d", 1)) {
        pos_ += 2;
        g = mk_dual(g);
      } else {
        return g;
      }
    }
  }

  Game gatom() {
    if (accept("{")) return ode();
    if (accept("(")) {
      Game g = game();
      expect(")");
      return g;
    }
    if (accept("?")) return mk_test(formula());
    std::vector<Var> targets = var_components();
    expect(":=");
    if (accept("*")) {
      Game g = mk_random(targets[0]);
      for (size_t i = 1; i < targets.size(); ++i) g = mk_seq(g, mk_random(targets[i]));
      return g;
    }
    VT rhs = term();
    if (rhs.size() != targets.size()) fail("assignment dimension mismatch");
    // vector assignment is simultaneous; stage through fresh copies when needed
    VarSet rhs_vars;
    for (auto& t : rhs)
      for (auto& v : free_vars(t)) rhs_vars.insert(v);
    bool clash = false;
    for (size_t i = 0; i + 1 < targets.size(); ++i)
      if (rhs_vars.count(targets[i])) clash = true;
    if (clash) fail("vector assignment reads its own target; assign components separately");
    Game g = mk_assign(targets[0], rhs[0]);
    for (size_t i = 1; i < targets.size(); ++i) g = mk_seq(g, mk_assign(targets[i], rhs[i]));
    return g;
  }

  Game ode() {
    std::vector<Var> states;
    std::vector<Term> rhs;
    do {
      std::vector<Var> lhs = var_components();
      expect("'");
      expect("=");
      VT r = term();
      if (r.size() != lhs.size()) fail("differential equation dimension mismatch");
      for (auto& t : r)
        if (has_diff(t)) fail("differential symbol on a right-hand side");
      states.insert(states.end(), lhs.begin(), lhs.end());
      rhs.insert(rhs.end(), r.begin(), r.end());
    } while (accept(","));
    std::vector<Var> demon, angel;
    Formula ys = mk_true(), zs = mk_true();
    if (accept("&")) {
      if (!is_ident("d")) control_part(states, demon, ys);
      if (is_ident("d")) {
        ++pos_;
        control_part(states, angel, zs);
      }
    }
    expect("}");
    try {
      return mk_diffgame(states, rhs, demon, ys, angel, zs);
    } catch (const ParseError&) {
      throw;
    } catch (const SyntaxError& e) {
      fail(e.what());
    }
  }

  bool at_part_end() const { return is_ident("d") || is_sym("}"); }

  void control_part(const std::vector<Var>& states, std::vector<Var>& controls, Formula& set) {
    size_t save = pos_;
    // explicit binder: y, z : F
    try {
      std::vector<Var> vs = var_components();
      while (accept(",")) {
        auto more = var_components();
        vs.insert(vs.end(), more.begin(), more.end());
      }
      if (is_sym(":")) {
        ++pos_;
        set = formula();
        controls = vs;
        return;
      }
    } catch (const ParseError&) {
    }
    pos_ = save;
    // single membership constraint: y in S
    try {
      std::vector<Var> vs = var_components();
      if (is_ident("in")) {
        ++pos_;
        VT subject;
        for (auto& v : vs) subject.push_back(mk_var(v));
        Formula f = membership(subject);
        if (at_part_end()) {
          set = f;
          controls = vs;
          return;
        }
      }
    } catch (const ParseError&) {
    }
    pos_ = save;
    set = formula();
    VarSet inferred = free_vars(set);
    for (auto& s : states) inferred.erase(s);
    controls.assign(inferred.begin(), inferred.end());
    if (controls.empty()) fail("control constraint mentions no control variable");
  }

  bool in_ode_lhs_ = false;

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  const ParseContext& ctx_;
  std::set<size_t> failed_paren_;
};

}  // namespace

bool is_reserved_word(const std::string& s) { return kReserved.count(s) > 0; }

Term parse_term(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  VT v = p.term();
  p.expect_end();
  if (v.size() != 1) throw ParseError("expected a scalar term", 1, 1);
  return v[0];
}

std::vector<Term> parse_vector_term(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  VT v = p.term();
  p.expect_end();
  return v;
}

Formula parse_formula(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  Formula f = p.formula();
  p.expect_end();
  return f;
}

Game parse_game(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  Game g = p.game();
  p.expect_end();
  return g;
}

std::vector<std::pair<Var, Term>> parse_assignments(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  std::vector<std::pair<Var, Term>> out;
  do {
    std::vector<Var> targets = p.var_components();
    p.expect(":=");
    VT rhs = p.term();
    if (rhs.size() != targets.size()) p.fail("assignment dimension mismatch");
    for (size_t i = 0; i < rhs.size(); ++i) out.emplace_back(targets[i], rhs[i]);
  } while (p.accept(","));
  p.expect_end();
  return out;
}

std::vector<Var> parse_var_list(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  std::vector<Var> out;
  do {
    auto vs = p.var_components();
    out.insert(out.end(), vs.begin(), vs.end());
  } while (p.accept(","));
  p.expect_end();
  return out;
}

}  // namespace dhg
