#pragma once
// Exact rationals backed by GMP.

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace dhg {

using Rational = mpq_class;

// Accepts "12", "0.75", "3/4" (sign optional). Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// "3/4", "-2", "0".
std::string to_string(const Rational& q);

bool is_integer(const Rational& q);

// Nearest double, and doubles bracketing q from below / above.
double to_double(const Rational& q);
double to_double_down(const Rational& q);
double to_double_up(const Rational& q);

// Exact dyadic value of a finite double.
Rational from_double(double d);

// Square root when q is the square of a rational.
std::optional<Rational> rational_sqrt(const Rational& q);

Rational rational_pow(const Rational& base, unsigned exp);

}  // namespace dhg
