#pragma once
// Numerical semantics: responses of differential games, semi-Lagrangian
// Isaacs value grids, sign verdicts, grid winning regions of hybrid games and
// feedback rollouts. A cross-check for the proof calculus, not a proof method.

#include <cstdint>
#include <stdexcept>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dhg/ast.hpp"
#include "dhg/eval.hpp"

namespace dhg {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite control samples; every point satisfies the constraint exactly.
struct ControlGrid {
  std::vector<Var> vars;
  std::vector<RatEnv> exact;
  std::vector<std::vector<double>> points;  // points[k][i] is vars[i] of sample k
};

ControlGrid control_grid(const std::vector<Var>& vars, const Formula& set, int resolution,
                         const RatEnv& params = {});

// --- responses --------------------------------------------------------------------

// Control value exact[i] holds on [breaks[i], breaks[i+1]); the last one until the end.
struct PiecewiseControl {
  std::vector<double> breaks;
  std::vector<RatEnv> values;
  static PiecewiseControl constant(const RatEnv& v) { return {{0.0}, {v}}; }
};

struct Trajectory {
  double dt = 0;
  std::vector<Var> states, demon_vars, angel_vars;
  std::vector<double> times;
  std::vector<std::vector<double>> points;  // state at each time
  std::vector<std::vector<double>> demon;   // controls used on [t_k, t_k+1)
  std::vector<std::vector<double>> angel;
};

// Fixed-step RK4 for x' = f(x, y(t), z(t)). Throws OracleError when a control
// value violates its constraint or a break point falls between steps.
Trajectory integrate_response(const Game& g, const PiecewiseControl& y, const PiecewiseControl& z,
                              const std::vector<double>& xi, double T, double dt, const RatEnv& params = {});

// --- grids ------------------------------------------------------------------------

struct GridAxis {
  Var var;
  Rational lo, hi;
  int nodes = 2;  // lo == hi allows a single node
};

struct GridSpec {
  std::vector<GridAxis> axes;

  size_t size() const;
  int dims() const { return static_cast<int>(axes.size()); }
  double step(int d) const;
  Rational exact_step(int d) const;
  double coord(int d, int i) const;
  Rational exact_coord(int d, int i) const;
  std::vector<int> index(size_t flat) const;
  size_t flat(const std::vector<int>& idx) const;
  int axis_of(const Var& v) const;  // -1 if absent
};

// Axes with spacing dx (hi - lo must be a multiple of dx).
GridSpec make_grid(const std::vector<std::pair<Var, std::pair<Rational, Rational>>>& box, const Rational& dx);

// Multilinear interpolation of node values; points outside clamp to the box.
double interpolate(const GridSpec& grid, const std::vector<double>& values, const double* point);

enum class ValueKind { Lower, Upper };
struct Flavor {
  ValueKind kind = ValueKind::Lower;
  bool frozen = false;
};
std::string to_string(const Flavor& f);

struct IsaacsConfig {
  GridSpec grid;
  double T = 1;
  double dt = 0.01;
  int resolution_demon = 4;
  int resolution_angel = 4;
  RatEnv params;
  int threads = 1;  // 1 selects the serial kernel
};

struct ValueGrid {
  GridSpec grid;
  double T = 0, dt = 0;
  int steps = 0;
  Flavor flavor;
  Term payoff;                            // null for grid-set payoffs
  std::vector<std::vector<double>> V;     // V[k] at time k*dt, k = 0..steps
  std::size_t out_of_domain = 0;          // foot points clamped to the box

  double at(int layer, const std::vector<double>& x) const;
  double initial(const std::vector<double>& x) const { return at(0, x); }
};

// Backward semi-Lagrangian scheme for the lower (Demon maximises first) or
// upper value; frozen flavors add Angel's stop factor c in {0,1}.
// Throws OracleError when dt moves a foot point more than one cell.
ValueGrid solve_isaacs(const Game& g, const Term& payoff, const IsaacsConfig& cfg, Flavor flavor);
ValueGrid solve_isaacs_serial(const Game& g, const Term& payoff, const IsaacsConfig& cfg, Flavor flavor);
ValueGrid solve_isaacs_parallel(const Game& g, const Term& payoff, const IsaacsConfig& cfg, Flavor flavor);

enum class Openness { Open, Closed };
enum class SignVerdict { DemonWins, AngelWins, Inconclusive };
std::string to_string(SignVerdict v);

SignVerdict value_sign_verdict(const ValueGrid& vg, const std::vector<double>& xi, Openness mode, double tau);

// Interior (strict) and closure (weak) relaxations of a first-order formula.
Formula relax_formula(const Formula& f, Openness mode);

// --- winning regions ------------------------------------------------------------------

using GridSet = std::vector<std::uint8_t>;
enum class Player { Angel, Demon };

struct RegionConfig {
  IsaacsConfig isaacs;  // grid, horizon and control sampling for differential games
  double tau = 0;
};

// Exact node sampling of a first-order formula.
GridSet sample_formula(const Formula& f, const GridSpec& grid, const RatEnv& params = {});

// Angel: states from which Angel can reach X (varsigma); Demon: can keep X (delta).
GridSet winning_region(const Game& g, const GridSet& X, Player player, const RegionConfig& cfg);

// Grid truth set of a dGL formula (modalities through winning_region).
GridSet grid_semantics(const Formula& f, const RegionConfig& cfg);

GridSet complement(const GridSet& s);
// Cells where a and b differ and no neighbour (Chebyshev distance 1) lies on the
// other side of a's boundary.
std::size_t differences_off_boundary(const GridSpec& grid, const GridSet& a, const GridSet& b);

// --- rollouts ---------------------------------------------------------------------

enum class AngelPolicy { Random, Adversarial };

struct RolloutConfig {
  double T = 1;
  double dt = 0.01;
  int resolution_angel = 4;
  RatEnv params;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
};

struct RolloutReport {
  bool violated = false;
  double violation_time = 0;
  std::vector<double> violation_state;
  Trajectory trajectory;
};

// Demon plays the feedback witness y(x); Angel plays random or one-step
// worst-case samples. The monitor is checked at every step. Throws OracleError
// when the witness leaves Demon's control set.
RolloutReport simulate_feedback(const Game& g, const std::vector<std::pair<Var, Term>>& witness, AngelPolicy policy,
                                const std::vector<double>& xi, const Formula& monitor, const RolloutConfig& cfg);

// --- exports ----------------------------------------------------------------------

// CSV with header t,<axes>,V, one row per layer and node.
void write_value_csv(const ValueGrid& vg, std::ostream& out);
// "DHGV" magic, u32 version 1, u32 dims, per axis (f64 lo, f64 hi, u32 nodes),
// u32 steps, f64 dt, then (steps+1)*nodes f64 values; all little-endian.
void write_value_binary(const ValueGrid& vg, std::ostream& out);
ValueGrid read_value_binary(std::istream& in);
void write_trajectory_csv(const Trajectory& tr, std::ostream& out);
void write_region_csv(const GridSpec& grid, const GridSet& s, std::ostream& out);

}  // namespace dhg
