#pragma once
// Recursive-descent parser for the ASCII concrete syntax.
//
// Terms:    x, x[2], x', 3, 0.75, 3/4, -t, a+b, a-b, a*b, a/b, a^n, min(a,b), max(a,b),
//           sqrt(a), normSq(v), dot(u,v), perp(v), (a, b) vector literal
// Formulas: a >= b (> = <= < !=), v in [a,b], v in SET, !F, F & G, F | G, F -> G,
//           F <-> G, forall x F, exists x F, [g] F, <g> F, true, false
// Games:    {x' = f, u' = h & Y d Z}, x := t, x := *, ?F, g ++ h, g; h, g*, g^d
//
// Vector variables are declared in the context and expanded into indexed scalars.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dhg/ast.hpp"

namespace dhg {

class ParseError : public SyntaxError {
 public:
  ParseError(const std::string& msg, int line, int col);
  int line, col;
};

struct ParseContext {
  std::map<std::string, int> vectors;                     // name -> dimension
  std::map<std::string, std::vector<Term>> abbreviations;  // name -> (vector) term
  std::map<std::string, Formula> formulas;                 // named formulas
  struct SetDef {
    std::string param;
    std::string body;  // formula text over param
  };
  std::map<std::string, SetDef> sets;
  bool allow_witness = false;  // division and sqrt
  bool allow_diff = false;     // differential symbols in formulas
};

Term parse_term(std::string_view text, const ParseContext& ctx = {});
std::vector<Term> parse_vector_term(std::string_view text, const ParseContext& ctx = {});
Formula parse_formula(std::string_view text, const ParseContext& ctx = {});
Game parse_game(std::string_view text, const ParseContext& ctx = {});

// "y := 1" or "y := (a, b), z := c"; vector targets expand componentwise.
std::vector<std::pair<Var, Term>> parse_assignments(std::string_view text,
                                                    const ParseContext& ctx = {});
// "x" or "x[2]" or a vector name; returns its scalar components.
std::vector<Var> parse_var_list(std::string_view text, const ParseContext& ctx = {});

bool is_reserved_word(const std::string& s);

}  // namespace dhg
