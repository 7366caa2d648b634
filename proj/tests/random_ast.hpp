#pragma once
// Seeded random syntax generators shared by property tests.

#include <random>

#include "dhg/ast.hpp"

namespace dhg::testing {

class AstGen {
 public:
  explicit AstGen(unsigned seed, bool witness_ops = false) : rng_(seed), witness_(witness_ops) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Var var() {
    static const char* names[] = {"x", "y", "z", "u", "v"};
    int idx = pick(4) == 0 ? 1 + pick(2) : 0;
    return Var{names[pick(5)], idx};
  }

  Rational rational() {
    long num = pick(21) - 10;
    long den = 1 + (pick(3) == 0 ? pick(8) : 0);
    Rational q(num, den);
    q.canonicalize();
    return q;
  }

  Term term(int depth) {
    if (depth <= 0 || pick(4) == 0) return pick(2) ? mk_var(var()) : mk_const(rational());
    switch (pick(witness_ ? 10 : 7)) {
      case 0: return mk_neg(term(depth - 1));
      case 1:
      case 2: return mk_add(term(depth - 1), term(depth - 1));
      case 3: return mk_mul(term(depth - 1), term(depth - 1));
      case 4: return mk_pow(term(depth - 1), 1 + pick(4));
      case 5: return mk_min(term(depth - 1), term(depth - 1));
      case 6: return mk_max(term(depth - 1), term(depth - 1));
      case 7: return mk_div(term(depth - 1), term(depth - 1));
      case 8: return mk_sqrt(term(depth - 1));
      default: return mk_sub(term(depth - 1), term(depth - 1));
    }
  }

  // Polynomial terms only (no min/max/div/sqrt).
  Term poly(int depth) {
    if (depth <= 0 || pick(4) == 0) return pick(2) ? mk_var(var()) : mk_const(rational());
    switch (pick(5)) {
      case 0: return mk_neg(poly(depth - 1));
      case 1: return mk_add(poly(depth - 1), poly(depth - 1));
      case 2: return mk_sub(poly(depth - 1), poly(depth - 1));
      case 3: return mk_mul(poly(depth - 1), poly(depth - 1));
      default: return mk_pow(poly(depth - 1), 1 + pick(3));
    }
  }

  CmpOp op() { return static_cast<CmpOp>(pick(6)); }

  Formula formula(int depth) {
    if (depth <= 0 || pick(4) == 0) return mk_cmp(op(), term(2), term(2));
    switch (pick(10)) {
      case 0: return mk_not(formula(depth - 1));
      case 1: return mk_and(formula(depth - 1), formula(depth - 1));
      case 2: return mk_or(formula(depth - 1), formula(depth - 1));
      case 3: return mk_imply(formula(depth - 1), formula(depth - 1));
      case 4: return mk_equiv(formula(depth - 1), formula(depth - 1));
      case 5: return mk_forall(var(), formula(depth - 1));
      case 6: return mk_exists(var(), formula(depth - 1));
      case 7: return mk_box(game(depth - 1), formula(depth - 1));
      case 8: return mk_diamond(game(depth - 1), formula(depth - 1));
      default: return pick(2) ? mk_true() : mk_false();
    }
  }

  Game diffgame() {
    Var s{"x", 0}, y{"y", 0}, z{"z", 0};
    Term f = mk_add(mk_var(y), mk_mul(mk_const(rational()), mk_var(z)));
    Formula ys = mk_and(mk_cmp(CmpOp::Le, mk_const(-1), mk_var(y)), mk_cmp(CmpOp::Le, mk_var(y), mk_const(1)));
    Formula zs = mk_cmp(CmpOp::Le, mk_pow(mk_var(z), 2), mk_var(Var{"u", 0}));
    switch (pick(3)) {
      case 0: return mk_diffgame({s}, {f}, {y}, ys, {z}, zs);
      case 1: return mk_diffgame({s}, {mk_var(z)}, {}, mk_true(), {z}, zs);
      default: return mk_diffgame({s, Var{"t", 0}}, {f, mk_const(1)}, {y}, ys, {}, mk_true());
    }
  }

  Game game(int depth) {
    if (depth <= 0 || pick(3) == 0) {
      switch (pick(4)) {
        case 0: return mk_assign(var(), term(2));
        case 1: return mk_random(var());
        case 2: return mk_test(formula(1));
        default: return diffgame();
      }
    }
    switch (pick(4)) {
      case 0: return mk_choice(game(depth - 1), game(depth - 1));
      case 1: return mk_seq(game(depth - 1), game(depth - 1));
      case 2: return mk_repeat(game(depth - 1));
      default: return mk_dual(game(depth - 1));
    }
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
  bool witness_;
};

}  // namespace dhg::testing
