#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "dhg/eval.hpp"
#include "dhg/oracle.hpp"
#include "dhg/oracle_setup.hpp"
#include "dhg/parser.hpp"
#include "dhg/symbolic.hpp"

using namespace dhg;

namespace {

std::string corpus(const std::string& name) { return std::string(DHG_CORPUS) + "/" + name + ".dhg"; }

OracleSetup setup_of(const std::string& name, const OracleOverrides& over = {}) {
  return oracle_setup(load_dhg(corpus(name)), over);
}

GridSpec line_grid(const char* var, long lo, long hi, const Rational& dx) {
  return make_grid({{Var{var}, {Rational(lo), Rational(hi)}}}, dx);
}

IsaacsConfig config(GridSpec g, double T, double dt, int res = 4) {
  IsaacsConfig c;
  c.grid = std::move(g);
  c.T = T;
  c.dt = dt;
  c.resolution_demon = c.resolution_angel = res;
  return c;
}

// Max |V(0,x) - (x + shift)| over nodes with |x| <= half; the window keeps the
// clamped boundary layer (speed 2, plus numerical spreading) out of reach.
double linear_error(const ValueGrid& vg, double shift, double half) {
  double err = 0;
  const GridAxis& a = vg.grid.axes[0];
  for (int i = 0; i < a.nodes; ++i) {
    double x = vg.grid.coord(0, i);
    if (std::abs(x) > half + 1e-9) continue;
    err = std::max(err, std::abs(vg.V[0][i] - (x + shift)));
  }
  return err;
}

std::vector<double> node_point(const GridSpec& g, size_t i) {
  std::vector<int> idx = g.index(i);
  std::vector<double> x;
  for (int d = 0; d < g.dims(); ++d) x.push_back(g.coord(d, idx[d]));
  return x;
}

}  // namespace

// --- responses ----------------------------------------------------------------------

TEST(Response, IntegratorReachesOne) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  auto tr = integrate_response(g, PiecewiseControl::constant({{Var{"y"}, Rational(1)}}), PiecewiseControl::constant({}),
                               {0.0}, 1.0, 0.01);
  EXPECT_NEAR(tr.points.back()[0], 1.0, 1e-9);
  EXPECT_EQ(tr.times.size(), 101u);
}

TEST(Response, StrengthConstantRhs) {
  OracleSetup s = setup_of("strength");
  RatEnv one{{Var{"y"}, Rational(1)}}, zone{{Var{"z"}, Rational(1)}};
  auto tr = integrate_response(s.game, PiecewiseControl::constant(one), PiecewiseControl::constant(zone), {1.0}, 2.0,
                               0.01);
  for (size_t k = 0; k < tr.times.size(); ++k) EXPECT_NEAR(tr.points[k][0], 1 + 2 * tr.times[k], 1e-6);
}

TEST(Response, PursuitEqualVelocitiesKeepDifference) {
  OracleSetup s = setup_of("pursuit_pos");
  RatEnv params{{Var{"L"}, Rational(1)}, {Var{"M"}, Rational(1)}};
  RatEnv y{{Var{"y", 1}, Rational(1)}, {Var{"y", 2}, Rational(0)}};
  RatEnv z{{Var{"z", 1}, Rational(1)}, {Var{"z", 2}, Rational(0)}};
  std::vector<double> xi;
  for (const Var& v : s.game->states) xi.push_back(v.name == "l" ? (v.index == 1 ? 2.0 : 0.5) : -0.25);
  auto tr = integrate_response(s.game, PiecewiseControl::constant(y), PiecewiseControl::constant(z), xi, 1.0, 0.01,
                               params);
  auto diff = [&](const std::vector<double>& p, int comp) {
    double l = 0, m = 0;
    for (size_t i = 0; i < s.game->states.size(); ++i) {
      const Var& v = s.game->states[i];
      if (v.index != comp) continue;
      (v.name == "l" ? l : m) = p[i];
    }
    return l - m;
  };
  for (const auto& p : tr.points) {
    EXPECT_NEAR(diff(p, 1), diff(xi, 1), 1e-12);
    EXPECT_NEAR(diff(p, 2), diff(xi, 2), 1e-12);
  }
}

TEST(Response, PiecewiseControlSwitches) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  PiecewiseControl y{{0.0, 0.5}, {{{Var{"y"}, Rational(1)}}, {{Var{"y"}, Rational(-1)}}}};
  auto tr = integrate_response(g, y, PiecewiseControl::constant({}), {0.0}, 1.0, 0.01);
  EXPECT_NEAR(tr.points[50][0], 0.5, 1e-9);
  EXPECT_NEAR(tr.points.back()[0], 0.0, 1e-9);
}

TEST(Response, RejectsControlOutsideSet) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  EXPECT_THROW(integrate_response(g, PiecewiseControl::constant({{Var{"y"}, Rational(2)}}),
                                  PiecewiseControl::constant({}), {0.0}, 1.0, 0.01),
               OracleError);
}

TEST(Response, RejectsBreakBetweenSteps) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  PiecewiseControl y{{0.0, 0.505}, {{{Var{"y"}, Rational(1)}}, {{Var{"y"}, Rational(0)}}}};
  EXPECT_THROW(integrate_response(g, y, PiecewiseControl::constant({}), {0.0}, 1.0, 0.01), OracleError);
}

// --- grids and the Isaacs scheme ----------------------------------------------------------

TEST(Grid, NodesAreExact) {
  GridSpec g = line_grid("x", -3, 3, Rational(1, 20));
  EXPECT_EQ(g.axes[0].nodes, 121);
  EXPECT_EQ(g.exact_coord(0, 70), Rational(1, 2));
  EXPECT_THROW(line_grid("x", 0, 1, Rational(3, 10)), OracleError);
}

TEST(Grid, InterpolationIsMultilinear) {
  GridSpec g = make_grid({{Var{"a"}, {Rational(0), Rational(1)}}, {Var{"b"}, {Rational(0), Rational(1)}}}, Rational(1));
  std::vector<double> v = {0, 1, 2, 3};  // a*2 + b
  double p[2] = {0.25, 0.5};
  EXPECT_DOUBLE_EQ(interpolate(g, v, p), 0.25 * 2 + 0.5);
}

TEST(Isaacs, IntegratorGameValue) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  ValueGrid vg = solve_isaacs(g, parse_term("x"), config(line_grid("x", -3, 3, Rational(1, 20)), 1.0, 0.01), {});
  EXPECT_LE(linear_error(vg, 1.0, 1.0), 3 * (0.05 + 0.01));
  EXPECT_NEAR(vg.initial({0.5}), 1.5, 1e-9);
}

TEST(Isaacs, CancellingGameValue) {
  Game g = parse_game("{x' = y - z & y in [-1,1] d z in [-1,1]}");
  ValueGrid vg = solve_isaacs(g, parse_term("x"), config(line_grid("x", -3, 3, Rational(1, 20)), 1.0, 0.01), {});
  for (int k = 0; k <= vg.steps; ++k)
    for (int i = 0; i < vg.grid.axes[0].nodes; ++i) {
      double x = vg.grid.coord(0, i);
      if (std::abs(x) <= 3 - 2 * (1 - k * vg.dt) - 1e-9) EXPECT_NEAR(vg.V[k][i], x, 1e-9);
    }
}

TEST(Isaacs, ConvergenceUnderRefinement) {
  Game g1 = parse_game("{x' = y & y in [-1,1]}");
  Game g2 = parse_game("{x' = y - z & y in [-1,1] d z in [-1,1]}");
  for (const Game& g : {g1, g2}) {
    double shift = g == g1 ? 1.0 : 0.0, margin = 0.5;
    ValueGrid a = solve_isaacs(g, parse_term("x"), config(line_grid("x", -3, 3, Rational(1, 20)), 1.0, 0.01), {});
    ValueGrid b = solve_isaacs(g, parse_term("x"), config(line_grid("x", -3, 3, Rational(1, 40)), 1.0, 0.005), {});
    double ea = linear_error(a, shift, margin), eb = linear_error(b, shift, margin);
    EXPECT_LE(ea, 3 * (0.05 + 0.01));
    // Linear payoffs are transported exactly; the ratio is only meaningful above round-off.
    if (ea > 1e-9) EXPECT_GE(ea / eb, 1.5);
  }
}

TEST(Isaacs, TerminalLayerIsPayoff) {
  OracleSetup s = setup_of("strength");
  ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, true});
  for (size_t i = 0; i < vg.grid.size(); ++i) {
    RatEnv env{{Var{"x"}, vg.grid.exact_coord(0, static_cast<int>(i))}};
    EXPECT_EQ(vg.V[vg.steps][i], to_double(*eval_exact(s.payoff, env)));
  }
}

TEST(Isaacs, StrengthValueAboveSubsolution) {
  OracleSetup s = setup_of("strength");
  for (bool frozen : {false, true}) {
    ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, frozen});
    EXPECT_GE(vg.initial({1.5}), 2.375 - 0.1);
  }
}

TEST(Isaacs, MinimaxAndFrozenOrdering) {
  for (const char* name : {"strength", "spiral", "bounded"}) {
    OracleSetup s = setup_of(name);
    for (bool frozen : {false, true}) {
      ValueGrid lo = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, frozen});
      ValueGrid up = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Upper, frozen});
      for (size_t i = 0; i < lo.V[0].size(); ++i) EXPECT_LE(lo.V[0][i], up.V[0][i] + 1e-9) << name;
    }
    ValueGrid plain = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, false});
    ValueGrid frozen = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, true});
    for (size_t i = 0; i < plain.V[0].size(); ++i) EXPECT_LE(frozen.V[0][i], plain.V[0][i] + 1e-9) << name;
  }
}

TEST(Isaacs, ParallelMatchesSerialBitwise) {
  for (const char* name : {"strength", "spiral"}) {
    OracleSetup s = setup_of(name);
    s.isaacs.threads = 4;
    for (ValueKind k : {ValueKind::Lower, ValueKind::Upper}) {
      ValueGrid a = solve_isaacs_serial(s.game, s.payoff, s.isaacs, {k, true});
      ValueGrid b = solve_isaacs_parallel(s.game, s.payoff, s.isaacs, {k, true});
      EXPECT_EQ(a.V, b.V) << name;
      EXPECT_EQ(a.out_of_domain, b.out_of_domain);
    }
  }
}

TEST(Isaacs, CflViolationSuggestsStep) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  try {
    solve_isaacs(g, parse_term("x"), config(line_grid("x", -3, 3, Rational(1, 20)), 1.0, 0.1), {});
    FAIL() << "expected a CFL error";
  } catch (const OracleError& e) {
    EXPECT_NE(std::string(e.what()).find("use dt <= 0.05"), std::string::npos) << e.what();
  }
}

TEST(Isaacs, OutOfDomainIsFlagged) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  ValueGrid vg = solve_isaacs(g, parse_term("x"), config(line_grid("x", -1, 1, Rational(1, 10)), 0.5, 0.1), {});
  EXPECT_GT(vg.out_of_domain, 0u);
  EXPECT_THROW(vg.initial({1.5}), OracleError);
}

// --- sign verdicts --------------------------------------------------------------------------

TEST(Verdict, StrengthDemonWins) {
  OracleSetup s = setup_of("strength");
  ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, true});
  EXPECT_EQ(s.openness, Openness::Closed);
  EXPECT_EQ(value_sign_verdict(vg, {1.5}, Openness::Closed, 0.05), SignVerdict::DemonWins);
  EXPECT_EQ(value_sign_verdict(vg, {1.5}, Openness::Open, 0.05), SignVerdict::DemonWins);
  EXPECT_EQ(value_sign_verdict(vg, {0.5}, Openness::Closed, 0.05), SignVerdict::AngelWins);
}

TEST(Verdict, PursuitDemonWins) {
  OracleSetup s = setup_of("pursuit_pos");
  ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, true});
  EXPECT_EQ(value_sign_verdict(vg, s.grid_point(s.start_env), s.openness, 0.05), SignVerdict::DemonWins);
}

TEST(Verdict, SpiralAngelWins) {
  OracleSetup s = setup_of("spiral");
  EXPECT_EQ(s.player, Player::Angel);
  ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Upper, true});
  EXPECT_EQ(value_sign_verdict(vg, s.grid_point(s.start_env), s.openness, 0.05), SignVerdict::AngelWins);
}

TEST(Verdict, RaceCarBothRelaxations) {
  for (Openness mode : {Openness::Open, Openness::Closed}) {
    OracleOverrides over;
    over.relax = mode;
    OracleSetup s = setup_of("race_car", over);
    ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, {ValueKind::Lower, true});
    SignVerdict v = value_sign_verdict(vg, s.grid_point(s.start_env), mode, 0.05);
    // Angel stops inside (4,8) at a time Demon cannot cover.
    EXPECT_EQ(v, SignVerdict::AngelWins) << (mode == Openness::Open ? "open" : "closed");
  }
  EXPECT_FALSE(setup_of("race_car").payoff);
}

// --- winning regions -------------------------------------------------------------------------

namespace {

RegionConfig small_config() {
  RegionConfig c;
  c.isaacs = config(make_grid({{Var{"x"}, {Rational(-2), Rational(2)}}, {Var{"w"}, {Rational(-2), Rational(2)}}},
                              Rational(1, 4)),
                    0.5, 0.1);
  return c;
}

}  // namespace

TEST(Region, TestIntersects) {
  RegionConfig c = small_config();
  GridSet X = sample_formula(parse_formula("x >= 0"), c.isaacs.grid);
  GridSet P = sample_formula(parse_formula("w <= 1"), c.isaacs.grid);
  GridSet r = winning_region(parse_game("?w <= 1"), X, Player::Angel, c);
  for (size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], X[i] && P[i]);
}

TEST(Region, ChoiceUnites) {
  RegionConfig c = small_config();
  GridSet X = sample_formula(parse_formula("x >= 1"), c.isaacs.grid);
  Game a = parse_game("x := x + 1"), b = parse_game("x := x - 1");
  GridSet ra = winning_region(a, X, Player::Angel, c), rb = winning_region(b, X, Player::Angel, c);
  GridSet r = winning_region(mk_choice(a, b), X, Player::Angel, c);
  for (size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], ra[i] || rb[i]);
}

TEST(Region, RandomAssignQuantifies) {
  RegionConfig c = small_config();
  Formula f = parse_formula("x^2 + w <= 4");
  GridSet X = sample_formula(f, c.isaacs.grid);
  GridSet r = winning_region(parse_game("x := *"), X, Player::Demon, c);
  for (size_t i = 0; i < r.size(); ++i) {
    double w = node_point(c.isaacs.grid, i)[1];
    EXPECT_EQ(r[i] != 0, w <= 0) << w;  // every grid x, |x| <= 2
  }
}

TEST(Region, AxiomsAgreeOnGrid) {
  RegionConfig c = small_config();
  const char* pairs[][2] = {
      {"[x := x + 1/2] x >= 1", "x + 1/2 >= 1"},
      {"[?w >= 0] x >= 0", "w >= 0 -> x >= 0"},
      {"<?w >= 0> x >= 0", "w >= 0 & x >= 0"},
      {"[x := 1 ++ x := -1] x*w >= 0", "w >= 0 & -w >= 0"},
      {"[x := x + 1/4; x := x + 1/4] x >= 1", "[x := x + 1/4][x := x + 1/4] x >= 1"},
      {"[(x := 1)^d] x >= w", "!<x := 1> !(x >= w)"},
      {"[x := *] x >= w", "forall x x >= w"},
      {"<x := *> x >= w", "exists x x >= w"},
      {"[(x := x + 1/4)*] x <= 1", "x <= 1 & [x := x + 1/4][(x := x + 1/4)*] x <= 1"},
      {"<(x := x + 1/4)*> x >= 1", "x >= 1 | <x := x + 1/4><(x := x + 1/4)*> x >= 1"},
  };
  for (auto& [l, r] : pairs) EXPECT_EQ(grid_semantics(parse_formula(l), c), grid_semantics(parse_formula(r), c)) << l;
}

TEST(Region, DeterminacyOnCorpusGames) {
  int games = 0;
  for (const char* name : {"strength", "spiral", "y2eq1", "bounded", "race_car"}) {
    OracleSetup s = setup_of(name);
    RegionConfig c = s.region_config();
    Formula target = s.post ? relax_formula(s.player == Player::Demon ? s.post : nnf(mk_not(s.post)), Openness::Closed)
                            : nullptr;
    GridSet X = sample_formula(target, c.isaacs.grid, c.isaacs.params);
    GridSet delta = winning_region(s.game, X, Player::Demon, c);
    GridSet varsigma = winning_region(s.game, complement(X), Player::Angel, c);
    EXPECT_EQ(complement(varsigma), delta) << name;
    ++games;
  }
  // a hybrid game around a differential game
  RegionConfig c = small_config();
  Game h = parse_game("(w := w - 1/4 ++ {x' = y & y in [-1,1]})*; ?x >= w");
  GridSet X = sample_formula(parse_formula("x^2 <= 1"), c.isaacs.grid);
  EXPECT_EQ(complement(winning_region(h, complement(X), Player::Angel, c)), winning_region(h, X, Player::Demon, c));
  EXPECT_GE(games + 1, 5);
}

TEST(Region, SuperfluousFreezing) {
  for (const char* name : {"strength", "spiral", "bounded"}) {
    OracleSetup s = setup_of(name);
    RegionConfig c = s.region_config();
    Formula target = s.player == Player::Demon ? s.post : nnf(mk_not(s.post));
    GridSet X = sample_formula(target, c.isaacs.grid, c.isaacs.params);
    for (Player p : {Player::Demon, Player::Angel}) {
      GridSet plain = winning_region(s.game, X, p, c);
      GridSet frozen = winning_region(freeze_transform(s.game), X, p, c);
      EXPECT_EQ(differences_off_boundary(c.isaacs.grid, plain, frozen), 0u) << name;
    }
  }
}

// --- rollouts ---------------------------------------------------------------------------

namespace {

RolloutConfig rollout_config(const OracleSetup& s) {
  RolloutConfig r;
  r.T = s.rollout_T;
  r.dt = s.rollout_dt;
  r.resolution_angel = s.isaacs.resolution_angel;
  r.params = s.isaacs.params;
  r.seed = s.seed;
  return r;
}

}  // namespace

TEST(Rollout, StrengthWitnessHolds) {
  OracleSetup s = setup_of("strength");
  auto rep = simulate_feedback(s.game, s.witness("default"), AngelPolicy::Adversarial, *s.start, s.monitor,
                               rollout_config(s));
  EXPECT_FALSE(rep.violated);
  EXPECT_NEAR(rep.trajectory.times.back(), 10.0, 1e-9);
}

TEST(Rollout, WrongWitnessViolates) {
  OracleSetup s = setup_of("strength");
  auto rep = simulate_feedback(s.game, s.witness("wrong"), AngelPolicy::Adversarial, *s.start, s.monitor,
                               rollout_config(s));
  ASSERT_TRUE(rep.violated);
  EXPECT_LT(rep.violation_state[0], 1.0);
  EXPECT_LT(rep.violation_time, 0.1);
}

TEST(Rollout, ZeppelinTangentWitnessHolds) {
  OracleSetup s = setup_of("zeppelin");
  for (AngelPolicy p : {AngelPolicy::Adversarial, AngelPolicy::Random}) {
    auto rep = simulate_feedback(s.game, s.witness("tangent"), p, *s.start, s.monitor, rollout_config(s));
    EXPECT_FALSE(rep.violated);
  }
}

TEST(Rollout, RandomPolicyIsSeeded) {
  OracleSetup s = setup_of("strength");
  RolloutConfig r = rollout_config(s);
  auto a = simulate_feedback(s.game, s.witness("default"), AngelPolicy::Random, *s.start, s.monitor, r);
  auto b = simulate_feedback(s.game, s.witness("default"), AngelPolicy::Random, *s.start, s.monitor, r);
  EXPECT_EQ(a.trajectory.points, b.trajectory.points);
  r.seed = 2;
  auto c = simulate_feedback(s.game, s.witness("default"), AngelPolicy::Random, *s.start, s.monitor, r);
  EXPECT_NE(a.trajectory.points, c.trajectory.points);
}

TEST(Rollout, WitnessOutsideControlSetThrows) {
  OracleSetup s = setup_of("strength");
  auto bad = parse_assignments("y := 2");
  EXPECT_THROW(simulate_feedback(s.game, bad, AngelPolicy::Random, *s.start, s.monitor, rollout_config(s)),
               OracleError);
}

// --- exports ---------------------------------------------------------------------------

TEST(Export, ValueCsvAndBinary) {
  Game g = parse_game("{x' = y & y in [-1,1]}");
  ValueGrid vg = solve_isaacs(g, parse_term("x"), config(line_grid("x", -1, 1, Rational(1, 2)), 0.2, 0.1), {});
  std::ostringstream csv;
  write_value_csv(vg, csv);
  std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x,V");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 5);
  std::ostringstream again;
  write_value_csv(vg, again);
  EXPECT_EQ(text, again.str());

  std::stringstream bin;
  write_value_binary(vg, bin);
  EXPECT_EQ(bin.str().substr(0, 4), "DHGV");
  EXPECT_EQ(bin.str().size(), 4 + 4 + 4 + (8 + 8 + 4) + 4 + 8 + 3 * 5 * 8u);
  ValueGrid back = read_value_binary(bin);
  EXPECT_EQ(back.V, vg.V);
  EXPECT_EQ(back.grid.axes[0].nodes, 5);
  EXPECT_DOUBLE_EQ(back.dt, 0.1);
}

TEST(Export, TrajectoryAndRegionCsv) {
  OracleSetup s = setup_of("strength");
  RolloutConfig r = rollout_config(s);
  r.T = 0.02;
  auto rep = simulate_feedback(s.game, s.witness("default"), AngelPolicy::Adversarial, *s.start, s.monitor, r);
  std::ostringstream out;
  write_trajectory_csv(rep.trajectory, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,x,y,z");

  GridSpec g = line_grid("x", 0, 1, Rational(1, 2));
  std::ostringstream reg;
  write_region_csv(g, {1, 0, 1}, reg);
  EXPECT_EQ(reg.str(), "x,in\n0,1\n0.5,0\n1,1\n");
}

TEST(Setup, RejectsUnknownKeys) {
  DhgFile f = parse_dhg("goal:\n  x >= 0\noracle:\n  boxes = x in [0,1]\n");
  EXPECT_THROW(oracle_setup(f), DhgError);
}

TEST(Setup, ZeppelinParamsSatisfyConstraint) {
  OracleSetup s = setup_of("zeppelin");
  DhgFile f = load_dhg(corpus("zeppelin"));
  auto k = holds_exact(f.ctx.formulas.at("K"), s.isaacs.params);
  ASSERT_TRUE(k.has_value());
  EXPECT_TRUE(*k);
}
