#pragma once
// `.dhg` files: declarations, a goal, a proof script, regions and oracle settings.
//
//   consts:
//     vector l 2                 # vector variable of dimension 2
//     p = 3/4                    # abbreviation (scalar or vector term)
//     set B(w) = normSq(w) <= 1  # control set, used as `y in B`
//     formula P = x >= 0         # named formula
//   goal:
//     P -> [{x' = y & y in [0,1]}] P
//   proof:
//     option solver z3           # budget N | outer-splits N | solver none|z3 | timeout SECONDS
//     rule implyR
//     rule andR
//       case left:
//         rule prop
//       case right:
//         open
//   regions:
//     near: x in [0,1], l in [-1,1], l[2] in [0,0]
//   oracle:
//     box = x=-3:3
//
// A line indented deeper than the previous one that does not start with a
// keyword continues it.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dhg/calculus.hpp"
#include "dhg/parser.hpp"

namespace dhg {

class DhgError : public std::runtime_error {
 public:
  DhgError(const std::string& msg, int line) : std::runtime_error(msg), line(line) {}
  int line;
};

struct DhgFile {
  std::string path;
  ParseContext ctx;
  std::string goal_text;
  ProofScript script;  // goal, steps, regions, backend options
  bool has_proof = false;
  std::vector<std::pair<std::string, std::string>> oracle;  // in file order

  std::optional<std::string> oracle_value(const std::string& key) const;
};

DhgFile parse_dhg(const std::string& text, const std::string& name = "<input>");
DhgFile load_dhg(const std::string& path);

// `x in [a,b], l in [a,b], l[1] in [a,b]` over the declared vectors.
RationalBox parse_region(const std::string& text, const ParseContext& ctx);

// One rule line without the `rule` keyword, e.g. "DGI witness y := 1".
RuleApplication parse_rule_line(const std::string& text, const ParseContext& ctx, int line = 0);

}  // namespace dhg
