#pragma once
// Outward-rounded double intervals. Directed rounding uses error-free
// transformations (TwoSum, FMA residuals), so exact results stay exact and
// no rounding-mode switching is needed.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dhg/rational.hpp"

namespace dhg {

namespace rnd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double down(double x) { return std::nextafter(x, -kInf); }
inline double up(double x) { return std::nextafter(x, kInf); }

// Overflow from finite operands: the true value is finite.
inline double fix_down(double r, double a, double b) {
  if (r == kInf && std::isfinite(a) && std::isfinite(b)) return DBL_MAX;
  return r;
}
inline double fix_up(double r, double a, double b) {
  if (r == -kInf && std::isfinite(a) && std::isfinite(b)) return -DBL_MAX;
  return r;
}

inline double add_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return fix_down(s, a, b);
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return err < 0 ? down(s) : s;
}
inline double add_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return fix_up(s, a, b);
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return err > 0 ? up(s) : s;
}

// Below this magnitude FMA residuals may underflow; widen unconditionally.
inline constexpr double kTiny = 0x1p-960;

inline double mul_down(double a, double b) {
  if (a == 0 || b == 0) return 0;
  double p = a * b;
  if (!std::isfinite(p)) return fix_down(p, a, b);
  if (std::abs(p) < kTiny) return down(p);
  return std::fma(a, b, -p) < 0 ? down(p) : p;
}
inline double mul_up(double a, double b) {
  if (a == 0 || b == 0) return 0;
  double p = a * b;
  if (!std::isfinite(p)) return fix_up(p, a, b);
  if (std::abs(p) < kTiny) return up(p);
  return std::fma(a, b, -p) > 0 ? up(p) : p;
}

inline double div_down(double a, double b) {
  double q = a / b;
  if (!std::isfinite(q) || !std::isfinite(a) || !std::isfinite(b)) return std::isfinite(q) ? q : fix_down(q, a, b);
  if (std::abs(q) < kTiny) return a == 0 ? 0 : down(q);
  double r = std::fma(-q, b, a);  // a - q*b, exact
  if (r == 0) return q;
  return ((r > 0) == (b > 0)) ? q : down(q);
}
inline double div_up(double a, double b) {
  double q = a / b;
  if (!std::isfinite(q) || !std::isfinite(a) || !std::isfinite(b)) return std::isfinite(q) ? q : fix_up(q, a, b);
  if (std::abs(q) < kTiny) return a == 0 ? 0 : up(q);
  double r = std::fma(-q, b, a);
  if (r == 0) return q;
  return ((r > 0) == (b > 0)) ? up(q) : q;
}

inline double sqrt_down(double a) {
  if (a <= 0) return 0;
  double s = std::sqrt(a);
  if (!std::isfinite(s)) return s;
  return std::fma(-s, s, a) < 0 ? down(s) : s;
}
inline double sqrt_up(double a) {
  if (a <= 0) return 0;
  double s = std::sqrt(a);
  if (!std::isfinite(s)) return s;
  return std::fma(-s, s, a) > 0 ? up(s) : s;
}

}  // namespace rnd

class IntervalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0, hi = 0;

  static Interval point(double x) { return {x, x}; }
  static Interval of(const Rational& q) { return {to_double_down(q), to_double_up(q)}; }
  static Interval of(const Rational& lo, const Rational& hi) { return {to_double_down(lo), to_double_up(hi)}; }
  static Interval entire() { return {-rnd::kInf, rnd::kInf}; }

  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains_zero() const { return lo <= 0 && 0 <= hi; }
  double width() const { return hi - lo; }
  double mid() const {
    if (std::isinf(lo) || std::isinf(hi)) {
      if (std::isinf(lo) && std::isinf(hi)) return 0;
      return std::isinf(lo) ? std::min(hi, 0.0) - 1 : std::max(lo, 0.0) + 1;
    }
    double m = lo / 2 + hi / 2;
    return std::clamp(m, lo, hi);
  }
  bool is_point() const { return lo == hi; }
  bool operator==(const Interval&) const = default;
};

inline Interval operator+(Interval a, Interval b) { return {rnd::add_down(a.lo, b.lo), rnd::add_up(a.hi, b.hi)}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }
inline Interval operator-(Interval a, Interval b) { return a + (-b); }

inline Interval operator*(Interval a, Interval b) {
  double c[4][2] = {{a.lo, b.lo}, {a.lo, b.hi}, {a.hi, b.lo}, {a.hi, b.hi}};
  double lo = rnd::kInf, hi = -rnd::kInf;
  for (auto& p : c) {
    lo = std::min(lo, rnd::mul_down(p[0], p[1]));
    hi = std::max(hi, rnd::mul_up(p[0], p[1]));
  }
  return {lo, hi};
}

inline Interval imin(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)}; }
inline Interval imax(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)}; }

inline Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }
inline Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

namespace rnd {
inline double pow_down(double a, unsigned n) {  // a >= 0
  double r = 1;
  for (unsigned i = 0; i < n; ++i) r = mul_down(r, a);
  return r;
}
inline double pow_up(double a, unsigned n) {
  double r = 1;
  for (unsigned i = 0; i < n; ++i) r = mul_up(r, a);
  return r;
}
}  // namespace rnd

// Monotone decomposition: even powers never go negative.
inline Interval ipow(Interval a, unsigned n) {
  if (n == 0) return {1, 1};
  if (n == 1) return a;
  if (n % 2 == 1) {
    double lo = a.lo >= 0 ? rnd::pow_down(a.lo, n) : -rnd::pow_up(-a.lo, n);
    double hi = a.hi >= 0 ? rnd::pow_up(a.hi, n) : -rnd::pow_down(-a.hi, n);
    return {lo, hi};
  }
  if (a.lo >= 0) return {rnd::pow_down(a.lo, n), rnd::pow_up(a.hi, n)};
  if (a.hi <= 0) return {rnd::pow_down(-a.hi, n), rnd::pow_up(-a.lo, n)};
  return {0, rnd::pow_up(std::max(-a.lo, a.hi), n)};
}

inline Interval idiv(Interval a, Interval b) {
  if (b.contains_zero()) throw IntervalError("division by an interval containing 0");
  double c[4][2] = {{a.lo, b.lo}, {a.lo, b.hi}, {a.hi, b.lo}, {a.hi, b.hi}};
  double lo = rnd::kInf, hi = -rnd::kInf;
  for (auto& p : c) {
    lo = std::min(lo, rnd::div_down(p[0], p[1]));
    hi = std::max(hi, rnd::div_up(p[0], p[1]));
  }
  return {lo, hi};
}

// Negative parts are cut off; `clipped` reports when that happened.
inline Interval isqrt(Interval a, bool* clipped = nullptr) {
  if (a.hi < 0) throw IntervalError("sqrt of a negative interval");
  if (a.lo < 0 && clipped) *clipped = true;
  return {rnd::sqrt_down(std::max(a.lo, 0.0)), rnd::sqrt_up(a.hi)};
}

inline std::string to_string(const Interval& i) {
  return "[" + std::to_string(i.lo) + ", " + std::to_string(i.hi) + "]";
}

}  // namespace dhg
