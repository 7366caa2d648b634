#pragma once
// Proof calculus: differential game rules, hybrid-game axioms, propositional
// bookkeeping rules, and a checker that reduces proof scripts to arithmetic
// side conditions.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dhg/arith.hpp"
#include "dhg/ast.hpp"
#include "dhg/shapes.hpp"

namespace dhg {

// Sequent: assumptions |- formula. Conjunctive assumptions are kept split.
struct Goal {
  std::vector<Formula> assumptions;
  Formula formula;
  std::string path;  // position in the proof tree, e.g. "root/right/pre"
};

Goal make_goal(const Formula& f);
void add_assumption(Goal& g, const Formula& a);
std::string to_string(const Goal& g);

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rule arguments. Unused fields stay empty.
struct RuleApplication {
  std::string rule;  // canonical id, see rule_names()
  std::vector<std::pair<Var, Term>> witness;
  std::optional<Rational> epsilon;
  Formula formula;  // invariant, cut, monotone intermediate, orL selector
  Game game;        // DGR antecedent game
  std::vector<std::pair<Var, Term>> solution;
  std::optional<Var> time;
  int line = 0;
};

const std::vector<std::string>& rule_names();
// Canonical rule id for a name or alias ("M" -> "monotone"); empty if unknown.
std::string canonical_rule(const std::string& name);

// Arithmetic obligation. The universal closure of `statement` must be valid.
// Built-in discharge uses the structured form:
//   forall region, control_box: exists `exists` in `exists_domain`: matrix
// with `matrix` quantifier-free.
struct SideCondition {
  std::string name;  // stable across runs
  std::string what;
  Formula statement;
  std::vector<Var> exists;
  Formula exists_domain;
  Formula matrix;
  std::vector<Var> controls;  // universally quantified control variables
  Formula control_set;        // their constraint (part of the matrix hypotheses)
};

struct RuleResult {
  std::vector<std::pair<std::string, Goal>> subgoals;  // labelled
  std::vector<SideCondition> sides;
  std::vector<std::string> notes;
};

// Premises of the differential game rules (free variables implicitly universal).
Formula dgi_premise(const Formula& f, const Game& g);
Formula dgv_premise(const Term& g_term, const Game& g);
Formula dgr_premise(const Game& g1, const Game& g2);

// One rule step. `prefix` names the side conditions. Throws RuleError.
RuleResult apply_rule(const Goal& goal, const RuleApplication& app, const std::string& prefix = "s");

// --- proof scripts ------------------------------------------------------------

struct ProofStep {
  RuleApplication app;
  bool open = false;  // explicit "open" marker instead of a rule
  std::vector<std::pair<std::string, std::vector<ProofStep>>> cases;
};

struct NamedRegion {
  std::string name;
  RationalBox box;
};

struct BackendConfig {
  ForallOptions forall;
  ExistsOptions exists;
  bool external_solver = false;
  double solver_timeout = 20;
  std::string emit_smt_dir;  // empty: no export
  std::string smt_prefix;    // file name prefix for exports
};

struct ProofScript {
  Formula goal;
  std::vector<ProofStep> steps;
  std::vector<NamedRegion> regions;
  BackendConfig backend;
};

enum class SideVerdict { Valid, ValidOnRegion, Falsified, Open };
std::string to_string(SideVerdict v);

struct Discharge {
  SideVerdict verdict = SideVerdict::Open;
  std::string method;
  std::string detail;
  std::string smt_file;  // set when exported
};

struct StepRecord {
  int index = 0;  // 1-based, depth-first script order
  int line = 0;
  std::string rule;
  std::string path;
  std::string goal;
  std::vector<std::pair<SideCondition, Discharge>> sides;
  std::vector<std::string> notes;
};

enum class ProofStatus { Proved, ProvedOnRegion, Open, Failed };
std::string to_string(ProofStatus s);
int exit_code(ProofStatus s);  // 0, 2, 3, 4

struct ProofResult {
  ProofStatus status = ProofStatus::Open;
  std::vector<StepRecord> steps;
  std::vector<Goal> open_goals;
  std::vector<std::string> open_conditions;
  int failed_step = 0;
  int failed_line = 0;
  std::string reason;
};

Discharge discharge(const SideCondition& c, const std::vector<NamedRegion>& regions,
                    const BackendConfig& cfg);

ProofResult check_proof(const ProofScript& script);

std::string report(const ProofResult& r);

}  // namespace dhg
