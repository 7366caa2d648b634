#include <gtest/gtest.h>

#include <cmath>

#include "dhg/eval.hpp"
#include "dhg/parser.hpp"
#include "dhg/poly.hpp"
#include "dhg/printer.hpp"
#include "dhg/shapes.hpp"
#include "dhg/symbolic.hpp"
#include "dhg/vars.hpp"
#include "random_ast.hpp"

namespace dhg {
namespace {

const Var X{"x"}, Y{"y"}, Z{"z"}, U{"u"};

Term T(const char* s) { return parse_term(s); }
Formula F(const char* s) { return parse_formula(s); }

TEST(Derive, ConstantIsZero) { EXPECT_TRUE(is_const(derive_term(mk_const(Rational(7, 3))), 0)); }

TEST(Derive, ProductRule) {
  Term d = derive_term(T("x*x"));
  ParseContext ctx;
  ctx.allow_diff = true;
  EXPECT_TRUE(poly_equal(d, parse_term("x'*x + x*x'", ctx)));
}

TEST(Derive, CubeNormalizesToThreeXSquared) {
  ParseContext ctx;
  ctx.allow_diff = true;
  Term d = derive_term(T("x^3"));
  EXPECT_TRUE(poly_equal(d, parse_term("3*x^2*x'", ctx)));
  EXPECT_EQ(print(gradient_form(d)), "3 * x^2 * x'");
}

TEST(Derive, MinMaxRejected) {
  EXPECT_THROW(derive_term(T("min(x, y)")), DerivationError);
  EXPECT_THROW(derive_formula(F("max(x, 1) >= 0")), DerivationError);
}

TEST(Derive, FormulaClauses) {
  Formula d = derive_formula(F("1 <= x^3"));
  ASSERT_EQ(d->kind, FormulaKind::Cmp);
  EXPECT_EQ(d->op, CmpOp::Le);
  EXPECT_TRUE(is_const(d->lhs, 0));
  Formula o = derive_formula(F("x > 0 | y < 1"));
  EXPECT_EQ(o->kind, FormulaKind::And);
  EXPECT_EQ(o->a->op, CmpOp::Ge);
  EXPECT_EQ(o->b->op, CmpOp::Le);
  Formula e = derive_formula(F("x = y"));
  EXPECT_EQ(e->op, CmpOp::Eq);
  Formula n = derive_formula(F("x != y"));
  EXPECT_EQ(n->op, CmpOp::Eq);
  EXPECT_THROW(derive_formula(F("forall x x > 0")), DerivationError);
  EXPECT_THROW(derive_formula(F("[x := 1] x > 0")), DerivationError);
}

TEST(Derive, NegationPushedFirst) {
  Formula d = derive_formula(F("!(x < 1)"));
  EXPECT_EQ(d->op, CmpOp::Ge);
}

TEST(Derive, Linearity) {
  testing::AstGen gen(11);
  for (int i = 0; i < 300; ++i) {
    Term a = gen.poly(3), b = gen.poly(3);
    EXPECT_TRUE(poly_equal(derive_term(mk_add(a, b)), mk_add(derive_term(a), derive_term(b))));
  }
}

TEST(Lie, StrengthPremise) {
  Formula d = derive_formula(F("1 <= x^3"));
  Formula p = lie_substitute(d, {{X, T("-1 + 2*y + z")}});
  EXPECT_FALSE(has_diff(p));
  EXPECT_TRUE(poly_equal(p->rhs, T("3*x^2*(-1 + 2*y + z)")));
  EXPECT_TRUE(is_const(p->lhs, 0));
}

TEST(Lie, PursuitPremise) {
  ParseContext ctx;
  ctx.vectors = {{"l", 2}, {"m", 2}, {"y", 2}, {"z", 2}};
  Formula d = derive_formula(parse_formula("normSq(l - m) >= 0", ctx));
  std::map<Var, Term> b;
  for (int i = 1; i <= 2; ++i) {
    b[Var{"l", i}] = mk_mul(mk_var(Var{"L"}), mk_var(Var{"z", i}));
    b[Var{"m", i}] = mk_mul(mk_var(Var{"M"}), mk_var(Var{"y", i}));
  }
  Formula p = lie_substitute(d, b);
  ctx.vectors["L"] = 0;
  ctx.vectors.erase("L");
  Term expect = parse_term("2*dot(l - m, L*z - M*y)", ctx);
  EXPECT_TRUE(poly_equal(mk_sub(p->lhs, p->rhs), expect));
}

TEST(Lie, UnboundDiffBecomesZero) {
  ParseContext ctx;
  ctx.allow_diff = true;
  Formula p = lie_substitute(parse_formula("c' >= 0", ctx), {{X, mk_const(1)}});
  EXPECT_EQ(print(p), "0 >= 0");
}

// Central difference (g(xi + h f) - g(xi - h f)) / 2h, evaluated in exact arithmetic.
TEST(Lie, FiniteDifferenceAgreement) {
  testing::AstGen gen(2024);
  std::vector<Var> vars = {X, Y, Z, U, Var{"v"}, Var{"x", 1}, Var{"x", 2}, Var{"y", 1}, Var{"y", 2},
                           Var{"z", 1}, Var{"z", 2}, Var{"u", 1}, Var{"u", 2}, Var{"v", 1}, Var{"v", 2}};
  int checked = 0;
  for (int trial = 0; checked < 200 && trial < 5000; ++trial) {
    Term g = gen.poly(3);
    std::map<Var, Term> rhs;
    for (const Var& v : vars) rhs[v] = gen.poly(2);
    RatEnv xi;
    for (const Var& v : vars) {
      xi[v] = Rational(gen.pick(301) - 150, 100);
      xi[v].canonicalize();
    }
    Term lie = lie_substitute(derive_term(g), rhs);
    Rational exact = *eval_exact(lie, xi);
    const Rational h(1, 100000);
    RatEnv plus = xi, minus = xi;
    for (const Var& v : vars) {
      Rational f = *eval_exact(rhs[v], xi);
      plus[v] += h * f;
      minus[v] -= h * f;
    }
    Rational fd = (*eval_exact(g, plus) - *eval_exact(g, minus)) / (2 * h);
    // relative to |exact| clamped away from zero at 1
    EXPECT_LE(to_double(abs(fd - exact) / std::max(Rational(abs(exact)), Rational(1))), 1e-6) << print(g);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(Arith, SimpleClauses) {
  Arithmetization a = arithmetize(F("x > 0 & x < 5"));
  EXPECT_EQ(a.mode, ArithMode::Open);
  EXPECT_EQ(print(a.term), "min(x, 5 - x)");
  Arithmetization e = arithmetize(F("x = y"));
  EXPECT_EQ(e.mode, ArithMode::Closed);
  EXPECT_EQ(print(e.term), "min(x - y, y - x)");
}

TEST(Arith, ZeppelinPostcondition) {
  ParseContext ctx;
  ctx.vectors = {{"x", 2}, {"o", 2}};
  Arithmetization a = arithmetize(parse_formula("normSq(x - o) >= c^2", ctx));
  EXPECT_EQ(a.mode, ArithMode::Closed);
  EXPECT_TRUE(poly_equal(a.term, parse_term("(x[1]-o[1])^2 + (x[2]-o[2])^2 - c^2", ctx)));
}

TEST(Arith, MixedRejected) {
  EXPECT_THROW(arithmetize(F("x > 0 & x <= 5")), ArithmetizeError);
  EXPECT_THROW(arithmetize(F("exists y x > y")), ArithmetizeError);
  EXPECT_FALSE(is_atomically_open(F("x > 0 & x <= 5")));
  EXPECT_FALSE(is_atomically_closed(F("x > 0 & x <= 5")));
  EXPECT_TRUE(is_atomically_closed(F("x >= 0 | x = 5")));
}

TEST(Arith, BooleanConstants) {
  EXPECT_TRUE(is_const(arithmetize(mk_true()).term, 1));
  EXPECT_TRUE(is_const(arithmetize(mk_false()).term, -1));
}

// Random open or closed formulas; exact agreement of F and its arithmetization.
TEST(Arith, AgreementProperty) {
  testing::AstGen gen(77);
  auto atom = [&](bool open) {
    static const CmpOp opens[] = {CmpOp::Gt, CmpOp::Lt, CmpOp::Ne};
    static const CmpOp closeds[] = {CmpOp::Ge, CmpOp::Le, CmpOp::Eq};
    CmpOp op = open ? opens[gen.pick(3)] : closeds[gen.pick(3)];
    return mk_cmp(op, gen.poly(2), gen.poly(1));
  };
  std::function<Formula(int, bool)> build = [&](int depth, bool open) -> Formula {
    if (depth == 0 || gen.pick(3) == 0) return atom(open);
    Formula a = build(depth - 1, open), b = build(depth - 1, open);
    return gen.pick(2) ? mk_and(a, b) : mk_or(a, b);
  };
  std::vector<Var> vars = {X, Y, Z, U, Var{"v"}, Var{"x", 1}, Var{"x", 2}, Var{"y", 1}, Var{"y", 2},
                           Var{"z", 1}, Var{"z", 2}, Var{"u", 1}, Var{"u", 2}, Var{"v", 1}, Var{"v", 2}};
  int points = 0;
  for (int f = 0; f < 500; ++f) {
    bool open = f % 2 == 0;
    Formula phi = build(3, open);
    Arithmetization ar = arithmetize(phi);
    ASSERT_EQ(ar.mode, open ? ArithMode::Open : ArithMode::Closed);
    for (int k = 0; k < 25; ++k) {
      RatEnv env;
      // small integers make equalities hit often enough
      for (const Var& v : vars) {
        env[v] = Rational(gen.pick(5) - 2, 1 + gen.pick(2));
        env[v].canonicalize();
      }
      bool truth = *holds_exact(phi, env);
      Rational val = *eval_exact(ar.term, env);
      ASSERT_EQ(truth, open ? val > 0 : val >= 0) << print(phi) << " => " << print(ar.term) << " val " << val.get_str();
      ++points;
    }
  }
  EXPECT_GE(points, 10000);
}

TEST(Poly, Identities) {
  EXPECT_TRUE(poly_equal(T("x + x"), T("2*x")));
  EXPECT_TRUE(poly_normalize(T("(x + 1)^2 - x^2 - 2*x - 1")).is_zero());
  // witness y = (u+1)/2 in 2x^3 y - x^3
  ParseContext w;
  w.allow_witness = true;
  Term lhs = substitute(T("2*x^3*y - x^3"), Y, parse_term("(u + 1)/2", w));
  EXPECT_TRUE(poly_equal(lhs, T("x^3*u")));
  EXPECT_THROW(poly_normalize(T("min(x, 1)")), PolyError);
}

TEST(Transform, FreezeStrength) {
  Game g = parse_game("{x' = -1 + 2*y + z & y in [-1,1] d z in [-1,1]}");
  Game fz = freeze_transform(g);
  EXPECT_EQ(print(fz), "{x' = $c0 * (-1 + 2 * y + z) & -1 <= y & y <= 1 d -1 <= z & z <= 1 & 0 <= $c0 & $c0 <= 1}");
  Game twice = freeze_transform(fz);
  EXPECT_EQ(twice->angel.size(), 3u);
  EXPECT_TRUE(well_definedness(g).ok);
  EXPECT_TRUE(well_definedness(fz).ok);
  EXPECT_TRUE(well_definedness(twice).ok);
}

TEST(Transform, FreezeWithoutAngelControls) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  Game fz = freeze_transform(g);
  ASSERT_EQ(fz->angel.size(), 1u);
  EXPECT_EQ(print(fz->angel_set), "0 <= $c0 & $c0 <= 1");
}

TEST(Transform, DomainEncodeWithClock) {
  Game g = parse_game("{x' = 1 & y in [0,1] d z in [0,1]}");
  Game e = domain_encode(g, F("x <= 5"));
  EXPECT_EQ(print(e),
            "$t0 := x; {x' = $b0 * 1, $t0' = 1 & 0 <= y & y <= 1 & 0 <= $b0 & $b0 <= 1 d 0 <= z & z <= 1}; "
            "?x <= 5; ?(x = $t0)^d")
      << print(e);
}

TEST(Transform, DomainEncodeInsertsClock) {
  Game g = parse_game("{x' = y & y in [-1,1] d z in [0,1]}");
  Game e = domain_encode(g, mk_true());
  std::string s = print(e);
  EXPECT_NE(s.find("$x0' = $b0 * 1"), std::string::npos) << s;
  EXPECT_NE(s.find("?($x0 = $t0)^d"), std::string::npos) << s;
}

TEST(WellDefined, Shapes) {
  EXPECT_TRUE(well_definedness(parse_game("{x' = y & y^2 = 1 d z in [0,1]}")).ok);
  WellDefinedness w = well_definedness(parse_game("{x' = y & y >= 0 d z in [0,1]}"));
  EXPECT_FALSE(w.ok);
  ASSERT_FALSE(w.warnings.empty());
  EXPECT_NE(w.warnings.front().find("unbounded"), std::string::npos);
  WellDefinedness s = well_definedness(parse_game("{x' = y & y > 0 & y <= 1 d z in [0,1]}"));
  EXPECT_FALSE(s.ok);
  ParseContext v;
  v.vectors = {{"y", 2}};
  EXPECT_TRUE(well_definedness(parse_game("{x' = y[1] & normSq(y) <= 1 d z in [0,1]}", v)).ok);
}

TEST(Shapes, VarietyEnumerated) {
  ControlShape s = analyse_controls({Y}, F("y^2 = 1"));
  ASSERT_TRUE(s.finite_points.has_value());
  ASSERT_EQ(s.finite_points->size(), 2u);
  EXPECT_EQ(s.finite_points->front().at(Y), -1);
  EXPECT_EQ(s.finite_points->back().at(Y), 1);
}

TEST(Shapes, RationalRoots) {
  auto r = rational_roots({Rational(-1), Rational(0), Rational(4)});  // 4y^2 - 1
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], Rational(-1, 2));
  EXPECT_EQ(r[1], Rational(1, 2));
  EXPECT_TRUE(rational_roots({Rational(-2), Rational(0), Rational(1)}).empty());
}

TEST(Shapes, SamplesSatisfyConstraint) {
  ParseContext v;
  v.vectors = {{"y", 2}};
  Formula ball = parse_formula("normSq(y) <= 1", v);
  std::vector<Var> ys = {Var{"y", 1}, Var{"y", 2}};
  auto pts = sample_controls(ys, ball, 8, {});
  int boundary = 0;
  for (const auto& p : pts) {
    EXPECT_TRUE(*holds_exact(ball, p));
    if (p.at(ys[0]) * p.at(ys[0]) + p.at(ys[1]) * p.at(ys[1]) == 1) ++boundary;
  }
  EXPECT_GE(boundary, 32);
  auto iv = sample_controls({Y}, F("-1 <= y & y <= 1 | y = 3"), 4, {});
  EXPECT_EQ(iv.size(), 6u);
}

TEST(Shapes, ParametricBounds) {
  Formula f = F("-w <= y & y <= w");
  ControlShape s = analyse_controls({Y}, f, {});
  EXPECT_TRUE(s.compact);
  EXPECT_TRUE(s.box.empty());
  ControlShape t = analyse_controls({Y}, f, {{Var{"w"}, Rational(2)}});
  ASSERT_EQ(t.box.count(Y), 1u);
  EXPECT_EQ(t.box.at(Y).second, 2);
}

}  // namespace
}  // namespace dhg
