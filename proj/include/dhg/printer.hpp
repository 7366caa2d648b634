#pragma once
// Canonical ASCII printing; parse(print(x)) reproduces x exactly.

#include <string>

#include "dhg/ast.hpp"

namespace dhg {

std::string print(const Term& t);
std::string print(const Formula& f);
std::string print(const Game& g);

}  // namespace dhg
