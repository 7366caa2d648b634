// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "dhg/arith.hpp"
#include "dhg/oracle.hpp"
#include "dhg/parser.hpp"

using namespace dhg;

namespace {

int threads() { return std::max(2, omp_get_max_threads()); }

// The spiral variant premise over a box away from the unit circle.
const Formula& forall_formula() {
  static Formula f = parse_formula(
      "1 - x^2 - u^2 <= 0 -> -2*u*(-u + y*x) - 2*x*(-x - y*u) >= 2");
  return f;
}

RationalBox forall_box() {
  RationalBox b;
  b.bounds[Var{"x"}] = {Rational(1), Rational(3)};
  b.bounds[Var{"u"}] = {Rational(-3), Rational(3)};
  b.bounds[Var{"y"}] = {Rational(-2), Rational(2)};
  return b;
}

void BM_ForallSerial(benchmark::State& st) {
  ForallOptions o;
  for (auto _ : st) benchmark::DoNotOptimize(decide_forall_serial(forall_formula(), forall_box(), o));
}

void BM_ForallParallel(benchmark::State& st) {
  ForallOptions o;
  o.threads = threads();
  for (auto _ : st) benchmark::DoNotOptimize(decide_forall_parallel(forall_formula(), forall_box(), o));
}

IsaacsConfig spiral_config() {
  IsaacsConfig c;
  c.grid = make_grid({{Var{"u"}, {Rational(-3), Rational(3)}}, {Var{"x"}, {Rational(-3), Rational(3)}}},
                     Rational(1, 10));
  c.T = 0.25;
  c.dt = 0.005;
  c.threads = threads();
  return c;
}

const Game& spiral_game() {
  static Game g = parse_game("{x' = z*x - y*u, u' = z*u + y*x & -2 <= y & y <= 2 d -1 <= z & z <= 1}");
  return g;
}

void BM_IsaacsSerial(benchmark::State& st) {
  IsaacsConfig c = spiral_config();
  Term payoff = parse_term("x^2 + u^2 - 1");
  for (auto _ : st) benchmark::DoNotOptimize(solve_isaacs_serial(spiral_game(), payoff, c, {ValueKind::Lower, true}));
}

void BM_IsaacsParallel(benchmark::State& st) {
  IsaacsConfig c = spiral_config();
  Term payoff = parse_term("x^2 + u^2 - 1");
  for (auto _ : st)
    benchmark::DoNotOptimize(solve_isaacs_parallel(spiral_game(), payoff, c, {ValueKind::Lower, true}));
}

}  // namespace

BENCHMARK(BM_ForallSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForallParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_IsaacsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IsaacsParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
