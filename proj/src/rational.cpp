#include "dhg/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace dhg {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty number");
  bool neg = false;
  size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  std::string body = s.substr(i);
  Rational out;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    mpz_class num(body.substr(0, slash), 10), den(body.substr(slash + 1), 10);
    if (den == 0) throw std::invalid_argument("zero denominator in " + s);
    out = Rational(num, den);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    std::string whole = body.substr(0, dot), frac = body.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (frac.empty()) frac = "0";
    for (char c : whole + frac)
      if (c < '0' || c > '9') throw std::invalid_argument("bad number " + s);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    out = Rational(mpz_class(whole + frac, 10), den);
  } else {
    for (char c : body)
      if (c < '0' || c > '9') throw std::invalid_argument("bad number " + s);
    out = Rational(mpz_class(body, 10));
  }
  out.canonicalize();
  return neg ? Rational(-out) : out;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

double to_double(const Rational& q) {
  double d = q.get_d();
  // get_d truncates; pick whichever neighbour is closer
  double other = std::nextafter(d, q > 0 ? INFINITY : -INFINITY);
  if (std::isfinite(other)) {
    Rational e1 = abs(Rational(d) - q), e2 = abs(Rational(other) - q);
    if (e2 < e1) return other;
  }
  return d;
}

double to_double_down(const Rational& q) {
  double d = q.get_d();
  if (Rational(d) > q) d = std::nextafter(d, -INFINITY);
  return d;
}

double to_double_up(const Rational& q) {
  double d = q.get_d();
  if (Rational(d) < q) d = std::nextafter(d, INFINITY);
  return d;
}

Rational from_double(double d) {
  if (!std::isfinite(d)) throw std::invalid_argument("non-finite double");
  return Rational(d);
}

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  mpz_class n = q.get_num(), d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t()))
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  Rational r(rn, rd);
  r.canonicalize();
  return r;
}

Rational rational_pow(const Rational& base, unsigned exp) {
  mpz_class n, d;
  mpz_pow_ui(n.get_mpz_t(), base.get_num_mpz_t(), exp);
  mpz_pow_ui(d.get_mpz_t(), base.get_den_mpz_t(), exp);
  Rational r(n, d);
  r.canonicalize();
  return r;
}

}  // namespace dhg
