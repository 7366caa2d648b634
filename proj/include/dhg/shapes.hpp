#pragma once
// Recognition of compact control constraints and exact control samples.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhg/ast.hpp"
#include "dhg/eval.hpp"

namespace dhg {

struct RationalBox {
  std::map<Var, std::pair<Rational, Rational>> bounds;
};

struct ControlShape {
  bool compact = true;
  std::vector<std::string> warnings;
  // Bounding box per control (absent when a bound could not be evaluated).
  std::map<Var, std::pair<Rational, Rational>> box;
  // When the set is finite and enumerated: all its points.
  std::optional<std::vector<RatEnv>> finite_points;
};

// Analyses constraint `set` on `controls`. Parameters are evaluated from `params`;
// unevaluable bounds leave the box entry out but keep syntactic compactness.
ControlShape analyse_controls(const std::vector<Var>& controls, const Formula& set,
                              const RatEnv& params = {});

// Exact sample points of the control set: interval lattices with `resolution`+1
// points, ball lattices plus rational boundary points, enumerated varieties.
// Every returned point satisfies `set` exactly.
std::vector<RatEnv> sample_controls(const std::vector<Var>& controls, const Formula& set,
                                    int resolution, const RatEnv& params = {});

// Real roots that are rational, of a univariate polynomial with rational coefficients.
std::vector<Rational> rational_roots(const std::vector<Rational>& coeffs_low_to_high);

}  // namespace dhg
