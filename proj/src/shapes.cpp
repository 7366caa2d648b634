#include "dhg/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dhg/poly.hpp"
#include "dhg/printer.hpp"
#include "dhg/symbolic.hpp"

namespace dhg {

namespace {

std::vector<mpz_class> divisors(mpz_class n) {
  if (n < 0) n = -n;
  std::vector<mpz_class> out;
  if (n == 0) return out;
  if (n > mpz_class("1000000000000")) throw EvalError("constant too large for rational root search");
  for (mpz_class d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  return out;
}

Rational horner(const std::vector<Rational>& c, const Rational& x) {
  Rational acc = 0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace

std::vector<Rational> rational_roots(const std::vector<Rational>& coeffs) {
  std::vector<Rational> c = coeffs;
  while (!c.empty() && c.back() == 0) c.pop_back();
  if (c.size() <= 1) return {};
  std::set<Rational> roots;
  size_t low = 0;
  while (c[low] == 0) ++low;
  if (low > 0) roots.insert(0);
  c.erase(c.begin(), c.begin() + static_cast<long>(low));
  if (c.size() > 1) {
    mpz_class l = 1;
    for (const auto& q : c) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    std::vector<mpz_class> ints;
    for (const auto& q : c) ints.push_back(mpz_class(q * l));
    for (const auto& p : divisors(ints.front()))
      for (const auto& q : divisors(ints.back()))
        for (int s : {1, -1}) {
          Rational r(p * s, q);
          r.canonicalize();
          if (horner(c, r) == 0) roots.insert(r);
        }
  }
  return {roots.begin(), roots.end()};
}

namespace {

// Polynomial in the controls whose coefficients are polynomials in everything else.
using ControlPoly = std::map<Monomial, Polynomial>;

ControlPoly split(const Polynomial& p, const std::set<Var>& controls) {
  ControlPoly out;
  for (const auto& [m, c] : p.terms()) {
    Monomial cm, rest;
    for (const auto& pe : m) (controls.count(pe.first.var) && !pe.first.diff ? cm : rest).push_back(pe);
    Polynomial coeff = Polynomial::constant(c);
    for (const auto& [ind, e] : rest) coeff = coeff * Polynomial::indet(ind).pow(e);
    auto it = out.find(cm);
    if (it == out.end())
      out.emplace(cm, coeff);
    else
      it->second = it->second + coeff;
  }
  std::erase_if(out, [](const auto& kv) { return kv.second.is_zero(); });
  return out;
}

std::optional<Rational> eval_poly(const Polynomial& p, const RatEnv& params) {
  return eval_exact(p.to_term(), params);
}

// Upper rational approximation of sqrt(q), q >= 0.
Rational sqrt_up(const Rational& q) {
  if (auto r = rational_sqrt(q)) return *r;
  double d = std::nextafter(std::sqrt(to_double_up(q)), HUGE_VAL);
  d = std::nextafter(d, HUGE_VAL);
  return from_double(d);
}

struct Bounds {
  std::optional<Rational> lo, hi;
  bool lo_syn = false, hi_syn = false;  // syntactically bounded (value may be unknown)
  bool lo_unknown = false, hi_unknown = false;
  std::optional<std::set<Rational>> values;  // finite candidates
};

struct Ball {
  std::vector<Var> vars;
  std::vector<Rational> center;
  std::optional<Rational> radius;  // exact when rational
};

struct Conjunct {
  std::vector<Formula> atoms;
};

struct Analysis {
  bool compact = true;
  std::vector<std::string> warnings;
  std::vector<std::map<Var, Bounds>> per_disjunct;
  std::vector<std::vector<Ball>> balls;
};

void tighten_lo(Bounds& b, std::optional<Rational> v) {
  b.lo_syn = true;
  if (!v) {
    b.lo_unknown = true;
    return;
  }
  if (!b.lo || *v > *b.lo) b.lo = *v;
}

void tighten_hi(Bounds& b, std::optional<Rational> v) {
  b.hi_syn = true;
  if (!v) {
    b.hi_unknown = true;
    return;
  }
  if (!b.hi || *v < *b.hi) b.hi = *v;
}

// DNF of an NNF formula over comparison atoms.
std::vector<Conjunct> dnf(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True: return {Conjunct{}};
    case FormulaKind::False: return {};
    case FormulaKind::Cmp: return {Conjunct{{f}}};
    case FormulaKind::Or: {
      auto a = dnf(f->a), b = dnf(f->b);
      a.insert(a.end(), b.begin(), b.end());
      return a;
    }
    case FormulaKind::And: {
      auto a = dnf(f->a), b = dnf(f->b);
      std::vector<Conjunct> out;
      for (const auto& x : a)
        for (const auto& y : b) {
          Conjunct c = x;
          c.atoms.insert(c.atoms.end(), y.atoms.begin(), y.atoms.end());
          out.push_back(std::move(c));
        }
      if (out.size() > 4096) throw EvalError("control constraint too large to analyse");
      return out;
    }
    default: throw EvalError("control constraints must be first-order and quantifier-free");
  }
}

void analyse_atom(const Formula& atom, const std::set<Var>& controls, const RatEnv& params,
                  std::map<Var, Bounds>& bounds, std::vector<Ball>& balls, Analysis& an) {
  CmpOp op = atom->op;
  if (op == CmpOp::Gt || op == CmpOp::Lt || op == CmpOp::Ne) {
    an.compact = false;
    an.warnings.push_back("strict constraint " + print(atom) + " makes the control set not closed");
    if (op == CmpOp::Ne) return;
  }
  Polynomial g;
  try {
    Term diff = (op == CmpOp::Le || op == CmpOp::Lt) ? mk_sub(atom->rhs, atom->lhs) : mk_sub(atom->lhs, atom->rhs);
    g = poly_normalize(diff);
  } catch (const PolyError&) {
    return;
  }
  bool eq = op == CmpOp::Eq;
  ControlPoly cp = split(g, controls);  // atom: cp >= 0 (or = 0)
  std::set<Var> involved;
  unsigned maxdeg = 0;
  for (const auto& [m, c] : cp) {
    unsigned d = 0;
    for (const auto& [ind, e] : m) {
      involved.insert(ind.var);
      d += e;
    }
    maxdeg = std::max(maxdeg, d);
  }
  if (involved.empty()) return;
  auto coeff = [&](const Monomial& m) -> Polynomial {
    auto it = cp.find(m);
    return it == cp.end() ? Polynomial() : it->second;
  };
  auto constant_part = [&]() { return eval_poly(coeff({}), params); };

  if (maxdeg == 1 && involved.size() == 1) {
    Var u = *involved.begin();
    Polynomial a = coeff({{Indet{u, false}, 1}});
    if (!a.is_constant()) return;
    Rational av = a.constant_value();
    auto c = constant_part();
    std::optional<Rational> bound;
    if (c) bound = Rational(-*c / av);
    Bounds& b = bounds[u];
    if (eq || av > 0) tighten_lo(b, bound);
    if (eq || av < 0) tighten_hi(b, bound);
    if (eq && bound) b.values = std::set<Rational>{*bound};
    return;
  }

  if (eq && involved.size() == 1 && maxdeg >= 2) {
    Var u = *involved.begin();
    std::vector<Rational> cs(maxdeg + 1);
    bool known = true;
    for (const auto& [m, c] : cp) {
      unsigned d = m.empty() ? 0 : m.front().second;
      auto v = eval_poly(c, params);
      if (!v) {
        known = false;
        break;
      }
      cs[d] = *v;
    }
    Bounds& b = bounds[u];
    if (!known) {
      tighten_lo(b, std::nullopt);
      tighten_hi(b, std::nullopt);
      return;
    }
    while (!cs.empty() && cs.back() == 0) cs.pop_back();
    if (cs.size() <= 1) return;
    // Cauchy bound on all real roots.
    Rational m = 0;
    for (size_t i = 0; i + 1 < cs.size(); ++i) m = std::max(m, Rational(abs(cs[i] / cs.back())));
    tighten_lo(b, Rational(-1 - m));
    tighten_hi(b, Rational(1 + m));
    auto roots = rational_roots(cs);
    // Complete root set only when the rational roots account for the full degree.
    std::vector<Rational> work = cs;
    for (const auto& r : roots) {
      while (work.size() > 1 && horner(work, r) == 0) {
        std::vector<Rational> q(work.size() - 1);
        Rational carry = 0;
        for (size_t i = work.size(); i-- > 1;) {
          carry = work[i] + carry * r;
          q[i - 1] = carry;
        }
        work = q;
      }
    }
    bool complete = work.size() == 1 || [&] {
      // remaining factor without real roots when it is a positive-definite quadratic
      if (work.size() == 3) {
        Rational disc = work[1] * work[1] - 4 * work[0] * work[2];
        return disc < 0;
      }
      return false;
    }();
    if (complete) {
      std::set<Rational> vs(roots.begin(), roots.end());
      if (b.values) {
        std::set<Rational> inter;
        std::set_intersection(b.values->begin(), b.values->end(), vs.begin(), vs.end(),
                              std::inserter(inter, inter.begin()));
        b.values = inter;
      } else {
        b.values = vs;
      }
    } else {
      an.warnings.push_back("constraint " + print(atom) + " has irrational solutions; sampling uses rational roots only");
    }
    return;
  }

  if (maxdeg == 2) {
    // sum a_i u_i^2 + b_i u_i + c <= 0 form (g = -that >= 0), no cross terms.
    std::vector<Var> vars(involved.begin(), involved.end());
    std::vector<Rational> a, lin;
    bool ok = true, lin_known = true;
    for (const Var& u : vars) {
      Polynomial q = coeff({{Indet{u, false}, 2}});
      if (!q.is_constant() || q.constant_value() >= 0) {
        ok = false;
        break;
      }
      a.push_back(-q.constant_value());
      auto l = eval_poly(coeff({{Indet{u, false}, 1}}), params);
      if (!l) lin_known = false;
      lin.push_back(l ? Rational(-*l) : Rational(0));
    }
    size_t expected = 1 + vars.size();
    for (const Var& u : vars)
      if (cp.count({{Indet{u, false}, 1}})) ++expected;
    if (!cp.count({})) --expected;
    if (!ok || cp.size() != expected) return;
    auto c = constant_part();
    Ball ball;
    ball.vars = vars;
    std::optional<Rational> k;
    if (c && lin_known) {
      // sum a_i (u_i + lin_i/(2 a_i))^2 <= c + sum lin_i^2/(4 a_i)
      Rational kk = *c;
      for (size_t i = 0; i < vars.size(); ++i) {
        ball.center.push_back(Rational(-lin[i] / (2 * a[i])));
        kk += lin[i] * lin[i] / (4 * a[i]);
      }
      k = kk;
    }
    bool uniform = std::all_of(a.begin(), a.end(), [&](const Rational& x) { return x == a.front(); });
    for (size_t i = 0; i < vars.size(); ++i) {
      Bounds& b = bounds[vars[i]];
      if (!k) {
        tighten_lo(b, std::nullopt);
        tighten_hi(b, std::nullopt);
        continue;
      }
      if (*k < 0) {
        // empty set; keep the centre as a degenerate bound
        tighten_lo(b, ball.center[i]);
        tighten_hi(b, ball.center[i]);
        continue;
      }
      Rational r = sqrt_up(Rational(*k / a[i]));
      tighten_lo(b, Rational(ball.center[i] - r));
      tighten_hi(b, Rational(ball.center[i] + r));
    }
    if (k && *k >= 0 && uniform) {
      ball.radius = rational_sqrt(Rational(*k / a.front()));
      balls.push_back(ball);
    }
  }
}

Analysis analyse(const std::vector<Var>& controls, const Formula& set, const RatEnv& params) {
  Analysis an;
  std::set<Var> cs(controls.begin(), controls.end());
  auto disjuncts = dnf(nnf(set));
  for (const auto& d : disjuncts) {
    std::map<Var, Bounds> bounds;
    std::vector<Ball> balls;
    for (const auto& atom : d.atoms) analyse_atom(atom, cs, params, bounds, balls, an);
    an.per_disjunct.push_back(std::move(bounds));
    an.balls.push_back(std::move(balls));
  }
  std::set<Var> unbounded;
  for (const auto& bounds : an.per_disjunct)
    for (const Var& u : controls) {
      auto it = bounds.find(u);
      if (it == bounds.end() || !it->second.lo_syn || !it->second.hi_syn) unbounded.insert(u);
    }
  for (const Var& u : unbounded) {
    an.compact = false;
    an.warnings.push_back("control " + to_string(u) + " is unbounded");
  }
  std::sort(an.warnings.begin(), an.warnings.end());
  an.warnings.erase(std::unique(an.warnings.begin(), an.warnings.end()), an.warnings.end());
  return an;
}

RatEnv merged(const RatEnv& params, const RatEnv& point) {
  RatEnv env = params;
  for (const auto& [k, v] : point) env[k] = v;
  return env;
}

}  // namespace

ControlShape analyse_controls(const std::vector<Var>& controls, const Formula& set, const RatEnv& params) {
  Analysis an = analyse(controls, set, params);
  ControlShape out;
  out.compact = an.compact;
  out.warnings = an.warnings;
  bool have_box = !an.per_disjunct.empty();
  bool all_finite = true;
  std::vector<RatEnv> points;
  for (const auto& bounds : an.per_disjunct) {
    std::vector<std::vector<Rational>> vals;
    for (const Var& u : controls) {
      auto it = bounds.find(u);
      if (it == bounds.end() || !it->second.lo || !it->second.hi || it->second.lo_unknown ||
          it->second.hi_unknown) {
        have_box = false;
        all_finite = false;
        continue;
      }
      const Bounds& b = it->second;
      auto [bit, fresh] = out.box.emplace(u, std::make_pair(*b.lo, *b.hi));
      if (!fresh) {
        bit->second.first = std::min(bit->second.first, *b.lo);
        bit->second.second = std::max(bit->second.second, *b.hi);
      }
      if (b.values) {
        std::vector<Rational> v;
        for (const auto& x : *b.values)
          if (x >= *b.lo && x <= *b.hi) v.push_back(x);
        vals.push_back(v);
      } else if (*b.lo == *b.hi) {
        vals.push_back({*b.lo});
      } else {
        all_finite = false;
      }
    }
    if (!all_finite) continue;
    // product of candidate values, filtered exactly
    std::vector<size_t> idx(controls.size(), 0);
    bool empty = std::any_of(vals.begin(), vals.end(), [](const auto& v) { return v.empty(); });
    while (!empty) {
      RatEnv p;
      for (size_t i = 0; i < controls.size(); ++i) p[controls[i]] = vals[i][idx[i]];
      if (holds_exact(set, merged(params, p)).value_or(false)) points.push_back(p);
      size_t i = 0;
      while (i < idx.size() && ++idx[i] == vals[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
  }
  if (!have_box) out.box.clear();
  if (all_finite && out.compact) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    out.finite_points = points;
  }
  return out;
}

std::vector<RatEnv> sample_controls(const std::vector<Var>& controls, const Formula& set, int resolution,
                                    const RatEnv& params) {
  if (controls.empty()) return {RatEnv{}};
  ControlShape shape = analyse_controls(controls, set, params);
  if (shape.finite_points) return *shape.finite_points;
  Analysis an = analyse(controls, set, params);
  resolution = std::max(resolution, 1);
  std::set<RatEnv> points;
  auto accept = [&](const RatEnv& p) {
    if (holds_exact(set, merged(params, p)).value_or(false)) points.insert(p);
  };
  for (size_t d = 0; d < an.per_disjunct.size(); ++d) {
    const auto& bounds = an.per_disjunct[d];
    std::vector<std::vector<Rational>> axes;
    for (const Var& u : controls) {
      auto it = bounds.find(u);
      if (it == bounds.end() || !it->second.lo || !it->second.hi || it->second.lo_unknown ||
          it->second.hi_unknown)
        throw EvalError("cannot sample control " + to_string(u) + ": bounds unknown or infinite");
      const Bounds& b = it->second;
      std::vector<Rational> axis;
      if (b.values) {
        axis.assign(b.values->begin(), b.values->end());
      } else if (*b.lo == *b.hi) {
        axis.push_back(*b.lo);
      } else {
        for (int k = 0; k <= resolution; ++k) axis.push_back(Rational(*b.lo + (*b.hi - *b.lo) * k / resolution));
      }
      axes.push_back(axis);
    }
    std::vector<size_t> idx(controls.size(), 0);
    size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    if (total > 2'000'000) throw EvalError("control sample lattice too large");
    for (size_t n = 0; n < total; ++n) {
      RatEnv p;
      for (size_t i = 0; i < controls.size(); ++i) p[controls[i]] = axes[i][idx[i]];
      accept(p);
      size_t i = 0;
      while (i < idx.size() && ++idx[i] == axes[i].size()) idx[i++] = 0;
    }
    // Rational points on ball boundaries and along the axes through the centre.
    for (const Ball& ball : an.balls[d]) {
      if (!ball.radius) continue;
      const Rational& r = *ball.radius;
      auto base = [&] {
        RatEnv p;
        for (size_t i = 0; i < ball.vars.size(); ++i) p[ball.vars[i]] = ball.center[i];
        for (const Var& u : controls)
          if (!p.count(u)) p[u] = bounds.at(u).lo.value();
        return p;
      };
      for (size_t i = 0; i < ball.vars.size(); ++i)
        for (int s : {1, -1}) {
          RatEnv p = base();
          p[ball.vars[i]] += s * r;
          accept(p);
        }
      if (ball.vars.size() == 2) {
        int n = 2 * resolution;
        for (int k = 0; k <= n; ++k) {
          Rational t(k, n);
          Rational den = 1 + t * t;
          Rational cx = (1 - t * t) / den, cy = 2 * t / den;
          for (int sx : {1, -1})
            for (int sy : {1, -1})
              for (int swap = 0; swap < 2; ++swap) {
                RatEnv p = base();
                Rational a = swap ? cy : cx, b = swap ? cx : cy;
                p[ball.vars[0]] = ball.center[0] + sx * r * a;
                p[ball.vars[1]] = ball.center[1] + sy * r * b;
                accept(p);
              }
        }
      }
    }
  }
  return {points.begin(), points.end()};
}

}  // namespace dhg
