#pragma once
// Arithmetic side conditions: interval enclosures, branch-and-bound over
// boxes, exists-forall witness search, SMT-LIB export and an external solver hook.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhg/ast.hpp"
#include "dhg/eval.hpp"
#include "dhg/interval.hpp"
#include "dhg/shapes.hpp"

namespace dhg {

using Box = std::map<Var, Interval>;

Box to_interval_box(const RationalBox& b);

// Natural interval extension. Throws IntervalError on division by an interval
// containing 0, EvalError on uncovered variables or differential symbols.
Interval interval_eval(const Term& t, const Box& box, bool* sqrt_clipped = nullptr);

enum class VerdictKind { Valid, Falsified, Unknown };

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::optional<RatEnv> witness;  // refuting point (Falsified)
  std::size_t boxes = 0;          // boxes visited
  std::size_t undecided = 0;      // leaves left open (Unknown)
  std::string report;
};

std::string to_string(VerdictKind k);

struct ForallOptions {
  std::size_t budget = 200000;  // maximum number of boxes visited
  int threads = 1;              // 1 selects the serial kernel
  double min_width = 1e-9;      // boxes narrower than this are not split further
};

// forall box: F. F is quantifier-free and modality-free over the box variables.
Verdict decide_forall(const Formula& f, const RationalBox& box, const ForallOptions& opts = {});
// Explicit kernels; identical results for identical inputs.
Verdict decide_forall_serial(const Formula& f, const RationalBox& box, const ForallOptions& opts);
Verdict decide_forall_parallel(const Formula& f, const RationalBox& box, const ForallOptions& opts);

struct WitnessPiece {
  RationalBox outer;  // part of the outer box this witness covers
  RationalBox y;      // witness box (a point box for point witnesses)
};

struct ExistsForallResult {
  Verdict verdict;  // Valid or Unknown, never Falsified
  std::vector<WitnessPiece> pieces;
};

struct ExistsOptions {
  std::size_t budget = 2000000;           // total boxes over all inner checks
  std::size_t candidate_budget = 40000;   // per candidate witness
  int resolution = 4;                     // control sample lattice
  int y_box_depth = 6;                    // bisection levels for witness boxes
  int outer_splits = 0;                   // piecewise witnesses: outer bisection depth
  int threads = 1;
};

// forall outer: exists y in Y: forall inner: F.
// `outer` variables may be split for piecewise witnesses; `inner` may not.
ExistsForallResult search_exists_forall(const std::vector<Var>& y, const Formula& y_domain,
                                        const Formula& f, const RationalBox& outer,
                                        const RationalBox& inner, const ExistsOptions& opts = {});

// SMT-LIB 2 script checking validity of F: unsat means F is valid.
std::string export_smtlib(const Formula& f, const std::string& logic = "NRA");
// Symbol used for a variable in exported scripts.
std::string smt_symbol(const Var& v);

enum class SolverAnswer { Unsat, Sat, Unknown, Unavailable };

struct SolverResult {
  SolverAnswer answer = SolverAnswer::Unavailable;
  std::string output;
};

// Runs an external SMT solver (z3 from PATH, or $DHG_Z3) on a script.
SolverResult run_external_solver(const std::string& script, double timeout_seconds);
bool external_solver_available();

}  // namespace dhg
