#include <gtest/gtest.h>

#include "dhg/parser.hpp"
#include "dhg/printer.hpp"
#include "dhg/vars.hpp"
#include "random_ast.hpp"

namespace dhg {
namespace {

const char* kStrength = "1 <= x^3 -> [{x' = -1 + 2*y + z & y in [-1,1] d z in [-1,1]}] 1 <= x^3";

TEST(Parse, StrengthGameStructure) {
  Formula f = parse_formula(kStrength);
  ASSERT_EQ(f->kind, FormulaKind::Imply);
  const Formula& box = f->b;
  ASSERT_EQ(box->kind, FormulaKind::Box);
  const Game& g = box->game;
  ASSERT_EQ(g->kind, GameKind::DiffGame);
  EXPECT_EQ(g->states, std::vector<Var>{Var{"x"}});
  EXPECT_EQ(g->demon, std::vector<Var>{Var{"y"}});
  EXPECT_EQ(g->angel, std::vector<Var>{Var{"z"}});
  EXPECT_EQ(print(g->rhs[0]), "-1 + 2 * y + z");
  EXPECT_EQ(print(g->demon_set), "-1 <= y & y <= 1");
}

TEST(Parse, StrengthGameRoundTrip) {
  Formula f = parse_formula(kStrength);
  std::string once = print(f);
  Formula g = parse_formula(once);
  EXPECT_TRUE(equal(f, g));
  EXPECT_EQ(print(g), once);
}

TEST(Parse, DecimalBecomesExactRational) {
  Term t = parse_term("0.75");
  ASSERT_EQ(t->kind, TermKind::Const);
  EXPECT_EQ(t->value, Rational(3, 4));
  EXPECT_EQ(print(t), "3/4");
}

TEST(Parse, UnbalancedBraceReportsPosition) {
  try {
    parse_game("{x' = 1 & y in [0,1]");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1);
    EXPECT_GT(e.col, 1);
  }
}

TEST(Parse, RejectsNonNaturalExponent) {
  EXPECT_THROW(parse_term("x^y"), ParseError);
  EXPECT_THROW(parse_term("x^0"), ParseError);
  EXPECT_THROW(parse_term("x^1.5"), ParseError);
}

TEST(Parse, WitnessOperatorsOnlyInWitnessContext) {
  EXPECT_THROW(parse_term("x / y"), ParseError);
  EXPECT_THROW(parse_term("sqrt(x)"), ParseError);
  ParseContext w;
  w.allow_witness = true;
  EXPECT_EQ(parse_term("x / y", w)->kind, TermKind::Div);
  EXPECT_EQ(parse_term("sqrt(x)", w)->kind, TermKind::Sqrt);
}

TEST(Parse, DifferentialSymbolsOnlyWhereAllowed) {
  EXPECT_THROW(parse_formula("x' >= 0"), ParseError);
  ParseContext c;
  c.allow_diff = true;
  EXPECT_EQ(parse_formula("x' >= 0", c)->lhs->kind, TermKind::Diff);
}

TEST(Parse, RejectsEvolutionDomain) {
  EXPECT_THROW(parse_game("{x' = 1 & x >= 0}"), ParseError);
}

TEST(Parse, VectorSugarExpandsToScalars) {
  ParseContext c;
  c.vectors = {{"x", 2}, {"o", 2}};
  Term t = parse_term("normSq(x - o)", c);
  EXPECT_EQ(print(t), "(x[1] - o[1])^2 + (x[2] - o[2])^2");
  Game g = parse_game("{x' = (1, 0) & d o in [0,1]}", c);
  EXPECT_EQ(g->states.size(), 2u);
  EXPECT_EQ(g->angel.size(), 2u);
}

TEST(Parse, NamedSetsAndFormulas) {
  ParseContext c;
  c.vectors = {{"y", 2}, {"x", 2}};
  c.sets["B"] = {"w", "normSq(w) <= 1"};
  Game g = parse_game("{x' = y & y in B}", c);
  EXPECT_EQ(print(g->demon_set), "y[1]^2 + y[2]^2 <= 1");
  c.formulas["C"] = parse_formula("x[1] >= 0");
  Formula f = parse_formula("C & x[2] > 0", c);
  EXPECT_EQ(print(f), "x[1] >= 0 & x[2] > 0");
}

TEST(Parse, ExplicitBinderWithParameter) {
  Game g = parse_game("{x' = y & y : -k <= y & y <= k}");
  EXPECT_EQ(g->demon, std::vector<Var>{Var{"y"}});
  EXPECT_EQ(print(g), "{x' = y & y : -k <= y & y <= k}");
  EXPECT_TRUE(equal(parse_game(print(g)), g));
}

TEST(Print, SequenceBindsTighterThanChoice) {
  Game a = mk_assign(Var{"a"}, mk_const(1));
  Game b = mk_assign(Var{"b"}, mk_const(2));
  Game c = mk_assign(Var{"c"}, mk_const(3));
  EXPECT_EQ(print(mk_choice(a, mk_seq(b, c))), "a := 1 ++ b := 2; c := 3");
  EXPECT_EQ(print(mk_seq(mk_choice(a, b), c)), "(a := 1 ++ b := 2); c := 3");
}

TEST(Print, DualOfTest) {
  Formula phi = parse_formula("x >= 0");
  EXPECT_EQ(print(mk_dual(mk_test(phi))), "?(x >= 0)^d");
  EXPECT_TRUE(equal(parse_game("?(x >= 0)^d"), mk_dual(mk_test(phi))));
}

TEST(Print, NegativeConstantsRoundTrip) {
  for (Term t : {mk_neg(mk_const(2)), mk_const(-2), mk_pow(mk_const(-2), 2), mk_neg(mk_pow(mk_const(2), 2)),
                 mk_add(mk_var("x"), mk_const(-1)), mk_mul(mk_const(Rational(3, 4)), mk_var("x")),
                 mk_pow(mk_const(Rational(3, 4)), 2), mk_neg(mk_const(Rational(1, 2)))}) {
    EXPECT_TRUE(equal(parse_term(print(t)), t)) << print(t);
  }
}

TEST(Print, DivisionByLiteralStaysDivision) {
  ParseContext w;
  w.allow_witness = true;
  Term t = mk_div(mk_mul(mk_var("x"), mk_const(3)), mk_const(4));
  EXPECT_TRUE(equal(parse_term(print(t), w), t)) << print(t);
  Term u = mk_div(mk_const(3), mk_const(4));
  EXPECT_TRUE(equal(parse_term(print(u), w), u)) << print(u);
}

TEST(Vars, FreeAndBoundOfDiffGame) {
  Game g = parse_formula(kStrength)->b->game;
  EXPECT_EQ(free_vars(g), (VarSet{Var{"x"}}));
  EXPECT_EQ(bound_vars(g), (VarSet{Var{"x"}, Var{"y"}, Var{"z"}}));
}

TEST(Vars, FreeVarsOfAssignIsFreeVarsOfTerm) {
  Game g = parse_game("x := y + z");
  EXPECT_EQ(free_vars(g), (VarSet{Var{"y"}, Var{"z"}}));
}

TEST(Vars, SubstitutionStopsAtBinder) {
  Formula f = parse_formula("[x := 2] x = 2 & x > 0");
  Formula g = substitute(f, Var{"x"}, mk_const(5));
  EXPECT_EQ(print(g), "[x := 2] x = 2 & 5 > 0");
}

TEST(Vars, SubstitutionDetectsCapture) {
  Formula f = parse_formula("forall y x > y");
  EXPECT_THROW(substitute(f, Var{"x"}, mk_var("y")), SubstitutionError);
  Formula h = parse_formula("[x := 1 ++ ?true] x > 0");
  EXPECT_THROW(substitute(h, Var{"x"}, mk_const(3)), SubstitutionError);
}

TEST(Vars, BoundRenamingPreservesFreeVars) {
  testing::AstGen gen(7);
  for (int i = 0; i < 300; ++i) {
    Formula f = gen.formula(3);
    VarSet before = free_vars(f);
    for (const Var& v : all_vars(f)) {
      if (before.count(v)) continue;
      Var fresh{"$r", 0};
      EXPECT_EQ(free_vars(rename_all(f, v, fresh)), before) << print(f);
    }
  }
}

TEST(RoundTrip, RandomFormulasAndGames) {
  testing::AstGen gen(20240601, /*witness_ops=*/true);
  ParseContext w;
  w.allow_witness = true;
  for (int i = 0; i < 2000; ++i) {
    Formula f = gen.formula(4);
    std::string s = print(f);
    Formula back = parse_formula(s, w);
    ASSERT_TRUE(equal(back, f)) << s << "\n  reprinted: " << print(back);
    ASSERT_EQ(print(back), s);
  }
  for (int i = 0; i < 1000; ++i) {
    Game g = gen.game(4);
    std::string s = print(g);
    Game back = parse_game(s, w);
    ASSERT_TRUE(equal(back, g)) << s << "\n  reprinted: " << print(back);
  }
}

}  // namespace
}  // namespace dhg
