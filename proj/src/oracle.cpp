#include "dhg/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>

#include "dhg/printer.hpp"
#include "dhg/shapes.hpp"
#include "dhg/symbolic.hpp"
#include "dhg/vars.hpp"

namespace dhg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_diffgame(const Game& g) {
  if (!g || g->kind != GameKind::DiffGame) throw OracleError("expected a differential game");
}

int slot_of(const std::vector<Var>& slots, const Var& v) {
  auto it = std::find(slots.begin(), slots.end(), v);
  return it == slots.end() ? -1 : static_cast<int>(it - slots.begin());
}

// Appends parameters not yet present and returns their values in slot order.
void append_params(std::vector<Var>& slots, std::vector<double>& values, const RatEnv& params) {
  values.resize(slots.size(), 0.0);
  for (const auto& [v, q] : params) {
    int s = slot_of(slots, v);
    if (s >= 0) continue;
    slots.push_back(v);
    values.push_back(to_double(q));
  }
}

CompiledTerm compile(const Term& t, const std::vector<Var>& slots, const char* what) {
  try {
    return CompiledTerm(t, slots);
  } catch (const EvalError& e) {
    throw OracleError(std::string(what) + ": " + e.what());
  }
}

std::string fmt(double x, int prec = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

}  // namespace

// --- control samples --------------------------------------------------------------

ControlGrid control_grid(const std::vector<Var>& vars, const Formula& set, int resolution, const RatEnv& params) {
  ControlGrid cg;
  cg.vars = vars;
  if (vars.empty()) {
    cg.exact.emplace_back();
    cg.points.emplace_back();
    return cg;
  }
  cg.exact = sample_controls(vars, set, resolution, params);
  if (cg.exact.empty()) throw OracleError("no control samples for " + print(set));
  for (const RatEnv& e : cg.exact) {
    std::vector<double> p;
    for (const Var& v : vars) p.push_back(to_double(e.at(v)));
    cg.points.push_back(std::move(p));
  }
  return cg;
}

// --- responses --------------------------------------------------------------------

namespace {

struct Dynamics {
  std::vector<Var> slots;  // states, demon, angel, params
  std::vector<double> base;
  std::vector<CompiledTerm> f;
  size_t n = 0, demon_at = 0, angel_at = 0;

  explicit Dynamics(const Game& g, const RatEnv& params) {
    require_diffgame(g);
    slots = g->states;
    demon_at = slots.size();
    slots.insert(slots.end(), g->demon.begin(), g->demon.end());
    angel_at = slots.size();
    slots.insert(slots.end(), g->angel.begin(), g->angel.end());
    append_params(slots, base, params);
    n = g->states.size();
    for (const Term& r : g->rhs) f.push_back(compile(r, slots, "right-hand side"));
  }

  void eval(const double* buf, double* out) const {
    for (size_t i = 0; i < n; ++i) out[i] = f[i](buf);
  }

  // One RK4 step with controls held; buf holds the controls and params.
  void rk4(std::vector<double>& buf, double* x, double dt) const {
    std::vector<double> k1(n), k2(n), k3(n), k4(n), x0(x, x + n);
    auto at = [&](const std::vector<double>& k, double h, std::vector<double>& out) {
      for (size_t i = 0; i < n; ++i) buf[i] = x0[i] + h * k[i];
      eval(buf.data(), out.data());
    };
    for (size_t i = 0; i < n; ++i) buf[i] = x0[i];
    eval(buf.data(), k1.data());
    at(k1, dt / 2, k2);
    at(k2, dt / 2, k3);
    at(k3, dt, k4);
    for (size_t i = 0; i < n; ++i) x[i] = x0[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    for (size_t i = 0; i < n; ++i) buf[i] = x[i];
  }
};

void check_control(const std::vector<Var>& vars, const Formula& set, const RatEnv& value, const RatEnv& params,
                   const char* who) {
  if (vars.empty()) return;
  RatEnv env = params;
  for (const Var& v : vars) {
    auto it = value.find(v);
    if (it == value.end()) throw OracleError(std::string(who) + " control " + to_string(v) + " has no value");
    env[v] = it->second;
  }
  auto ok = holds_exact(set, env);
  if (!ok) {
    DblEnv d;
    for (const auto& [k, q] : env) d[k] = to_double(q);
    ok = holds_double(set, d);
  }
  if (!*ok) throw OracleError(std::string(who) + " control value violates " + print(set));
}

int steps_for(double T, double dt) {
  if (!(dt > 0) || !(T >= 0)) throw OracleError("need T >= 0 and dt > 0");
  double r = T / dt;
  long n = std::lround(r);
  if (std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r))
    throw OracleError("dt = " + fmt(dt) + " does not divide T = " + fmt(T));
  return static_cast<int>(n);
}

}  // namespace

Trajectory integrate_response(const Game& g, const PiecewiseControl& y, const PiecewiseControl& z,
                              const std::vector<double>& xi, double T, double dt, const RatEnv& params) {
  Dynamics dyn(g, params);
  if (xi.size() != dyn.n) throw OracleError("initial state has wrong dimension");
  for (const PiecewiseControl* pc : {&y, &z}) {
    if (pc->breaks.size() != pc->values.size() || pc->breaks.empty())
      throw OracleError("piecewise control needs one value per break point");
    for (double b : pc->breaks) {
      double r = b / dt;
      if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, std::abs(r)))
        throw OracleError("control break " + fmt(b) + " is not a multiple of dt");
    }
  }
  for (const RatEnv& v : y.values) check_control(g->demon, g->demon_set, v, params, "Demon");
  for (const RatEnv& v : z.values) check_control(g->angel, g->angel_set, v, params, "Angel");

  int steps = steps_for(T, dt);
  Trajectory tr;
  tr.dt = dt;
  tr.states = g->states;
  tr.demon_vars = g->demon;
  tr.angel_vars = g->angel;
  std::vector<double> buf = dyn.base, x = xi;
  auto piece = [&](const PiecewiseControl& pc, double t) {
    size_t i = 0;
    while (i + 1 < pc.breaks.size() && pc.breaks[i + 1] <= t + 1e-12 * std::max(1.0, t)) ++i;
    return &pc.values[i];
  };
  for (int k = 0; k <= steps; ++k) {
    double t = k * dt;
    tr.times.push_back(t);
    tr.points.push_back(x);
    if (k == steps) break;
    const RatEnv* yv = piece(y, t);
    const RatEnv* zv = piece(z, t);
    std::vector<double> yd, zd;
    for (size_t i = 0; i < g->demon.size(); ++i) yd.push_back(buf[dyn.demon_at + i] = to_double(yv->at(g->demon[i])));
    for (size_t i = 0; i < g->angel.size(); ++i) zd.push_back(buf[dyn.angel_at + i] = to_double(zv->at(g->angel[i])));
    tr.demon.push_back(yd);
    tr.angel.push_back(zd);
    dyn.rk4(buf, x.data(), dt);
  }
  return tr;
}

// --- grids ------------------------------------------------------------------------

size_t GridSpec::size() const {
  size_t n = 1;
  for (const GridAxis& a : axes) n *= static_cast<size_t>(a.nodes);
  return n;
}

Rational GridSpec::exact_step(int d) const {
  const GridAxis& a = axes[d];
  if (a.nodes <= 1) return Rational(0);
  return Rational(a.hi - a.lo) / (a.nodes - 1);
}

double GridSpec::step(int d) const { return to_double(exact_step(d)); }

Rational GridSpec::exact_coord(int d, int i) const { return Rational(axes[d].lo + exact_step(d) * i); }

double GridSpec::coord(int d, int i) const { return to_double(exact_coord(d, i)); }

std::vector<int> GridSpec::index(size_t flat) const {
  std::vector<int> idx(axes.size());
  for (int d = dims() - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % axes[d].nodes);
    flat /= axes[d].nodes;
  }
  return idx;
}

size_t GridSpec::flat(const std::vector<int>& idx) const {
  size_t f = 0;
  for (int d = 0; d < dims(); ++d) f = f * axes[d].nodes + idx[d];
  return f;
}

int GridSpec::axis_of(const Var& v) const {
  for (int d = 0; d < dims(); ++d)
    if (axes[d].var == v) return d;
  return -1;
}

GridSpec make_grid(const std::vector<std::pair<Var, std::pair<Rational, Rational>>>& box, const Rational& dx) {
  if (dx <= 0) throw OracleError("grid spacing must be positive");
  GridSpec g;
  for (const auto& [v, b] : box) {
    if (g.axis_of(v) >= 0) throw OracleError("axis " + to_string(v) + " given twice");
    if (b.second < b.first) throw OracleError("empty range for " + to_string(v));
    Rational cells = (b.second - b.first) / dx;
    if (!is_integer(cells))
      throw OracleError("range of " + to_string(v) + " is not a multiple of dx = " + to_string(dx));
    g.axes.push_back({v, b.first, b.second, static_cast<int>(cells.get_num().get_si()) + 1});
  }
  return g;
}

namespace {

// Precomputed strides and spacings for the hot loop.
struct Lattice {
  int D = 0;
  std::vector<double> lo, h;
  std::vector<std::vector<double>> xs;  // node coordinates, rounded from exact values
  std::vector<int> n;
  std::vector<size_t> stride;

  explicit Lattice(const GridSpec& g) : D(g.dims()) {
    stride.assign(D, 1);
    for (int d = 0; d < D; ++d) {
      lo.push_back(to_double(g.axes[d].lo));
      h.push_back(g.step(d));
      n.push_back(g.axes[d].nodes);
      xs.emplace_back();
      for (int i = 0; i < n.back(); ++i) xs.back().push_back(g.coord(d, i));
    }
    for (int d = D - 2; d >= 0; --d) stride[d] = stride[d + 1] * n[d + 1];
  }

  // Multilinear interpolation; `clamped` is set when the point leaves the box.
  double interp(const std::vector<double>& V, const double* p, bool& clamped) const {
    size_t base = 0;
    double w[16];
    size_t off[16];
    int m = 0;
    for (int d = 0; d < D; ++d) {
      if (n[d] <= 1) {
        if (std::abs(p[d] - lo[d]) > 1e-9) clamped = true;
        continue;
      }
      double u = (p[d] - lo[d]) / h[d];
      double lim = n[d] - 1;
      if (u < 0) {
        if (u < -1e-9) clamped = true;
        u = 0;
      } else if (u > lim) {
        if (u > lim + 1e-9) clamped = true;
        u = lim;
      }
      int i = std::min(static_cast<int>(std::floor(u)), n[d] - 2);
      base += static_cast<size_t>(i) * stride[d];
      if (m >= 16) throw OracleError("interpolation supports at most 16 moving axes");
      w[m] = u - i;
      off[m] = stride[d];
      ++m;
    }
    double acc = 0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      double wt = 1;
      size_t at = base;
      for (int k = 0; k < m; ++k) {
        if (mask & (1u << k)) {
          wt *= w[k];
          at += off[k];
        } else {
          wt *= 1 - w[k];
        }
      }
      if (wt != 0) acc += wt * V[at];
    }
    return acc;
  }

  void node_coords(size_t flat, double* out) const {
    for (int d = D - 1; d >= 0; --d) {
      size_t i = flat % n[d];
      flat /= n[d];
      out[d] = xs[d][i];
    }
  }
};

}  // namespace

double interpolate(const GridSpec& grid, const std::vector<double>& values, const double* point) {
  bool clamped = false;
  return Lattice(grid).interp(values, point, clamped);
}

std::string to_string(const Flavor& f) {
  std::string s = f.kind == ValueKind::Lower ? "lower" : "upper";
  return f.frozen ? s + "-frozen" : s;
}

double ValueGrid::at(int layer, const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != grid.dims()) throw OracleError("point has wrong dimension");
  for (int d = 0; d < grid.dims(); ++d) {
    double lo = to_double(grid.axes[d].lo), hi = to_double(grid.axes[d].hi);
    double tol = 1e-9 * std::max(1.0, hi - lo);
    if (x[d] < lo - tol || x[d] > hi + tol)
      throw OracleError("point outside the grid box on axis " + to_string(grid.axes[d].var));
  }
  if (layer < 0 || layer > steps) throw OracleError("no such time layer");
  return interpolate(grid, V[layer], x.data());
}

// --- Isaacs scheme ------------------------------------------------------------------

namespace {

struct IsaacsModel {
  Lattice lat;
  std::vector<Var> slots;  // axes, demon, angel, params
  std::vector<double> base;
  std::vector<int> state_axis;
  std::vector<CompiledTerm> f;
  std::vector<std::vector<double>> Y, Z;
  size_t demon_at = 0, angel_at = 0;

  IsaacsModel(const Game& g, const IsaacsConfig& cfg) : lat(cfg.grid) {
    require_diffgame(g);
    for (const GridAxis& a : cfg.grid.axes) slots.push_back(a.var);
    for (const Var& s : g->states) {
      int d = cfg.grid.axis_of(s);
      if (d < 0) throw OracleError("state " + to_string(s) + " has no grid axis");
      state_axis.push_back(d);
    }
    for (const Var& c : g->demon)
      if (cfg.grid.axis_of(c) >= 0) throw OracleError("control " + to_string(c) + " is a grid axis");
    for (const Var& c : g->angel)
      if (cfg.grid.axis_of(c) >= 0) throw OracleError("control " + to_string(c) + " is a grid axis");
    demon_at = slots.size();
    slots.insert(slots.end(), g->demon.begin(), g->demon.end());
    angel_at = slots.size();
    slots.insert(slots.end(), g->angel.begin(), g->angel.end());
    append_params(slots, base, cfg.params);
    for (const Term& r : g->rhs) f.push_back(compile(r, slots, "right-hand side"));
    Y = control_grid(g->demon, g->demon_set, cfg.resolution_demon, cfg.params).points;
    Z = control_grid(g->angel, g->angel_set, cfg.resolution_angel, cfg.params).points;
  }
};

// Which player maximizes the payoff, who picks first, and whether Angel may
// stop (c in {0,1}).
struct Orientation {
  bool demon_max = true;
  ValueKind kind = ValueKind::Lower;
  bool frozen = false;
};

struct Scratch {
  std::vector<double> buf, foot;
};

// One node of one backward step.
double step_node(const IsaacsModel& m, const std::vector<double>& next, size_t node, double dt, const Orientation& o,
                 Scratch& s, std::size_t& ood) {
  const int D = m.lat.D;
  m.lat.node_coords(node, s.buf.data());
  // Lower: Demon's sample set is outer; upper: Angel's.
  const bool demon_outer = o.kind == ValueKind::Lower;
  const auto& outer = demon_outer ? m.Y : m.Z;
  const auto& inner = demon_outer ? m.Z : m.Y;
  const size_t outer_at = demon_outer ? m.demon_at : m.angel_at;
  const size_t inner_at = demon_outer ? m.angel_at : m.demon_at;
  const bool outer_max = demon_outer == o.demon_max;
  double best = outer_max ? -kInf : kInf;
  for (const auto& a : outer) {
    std::copy(a.begin(), a.end(), s.buf.begin() + outer_at);
    double cur = outer_max ? kInf : -kInf;
    for (const auto& b : inner) {
      std::copy(b.begin(), b.end(), s.buf.begin() + inner_at);
      std::copy(s.buf.begin(), s.buf.begin() + D, s.foot.begin());
      for (size_t i = 0; i < m.f.size(); ++i) s.foot[m.state_axis[i]] += dt * m.f[i](s.buf.data());
      bool clamped = false;
      double v = m.lat.interp(next, s.foot.data(), clamped);
      if (clamped) ++ood;
      if (outer_max ? v < cur : v > cur) cur = v;
      if (outer_max ? cur <= best : cur >= best) break;
    }
    if (outer_max ? cur > best : cur < best) best = cur;
  }
  if (o.frozen) {
    // c = 0 keeps the node; Angel takes it when it helps her.
    double stay = next[node];
    best = o.demon_max ? std::min(stay, best) : std::max(stay, best);
  }
  return best;
}

Scratch make_scratch(const IsaacsModel& m) {
  Scratch s;
  s.buf = m.base;
  s.foot.assign(m.lat.D, 0.0);
  return s;
}

// Largest displacement in cells over all nodes and control pairs.
double cfl_ratio(const IsaacsModel& m, double dt, size_t nodes, int threads) {
  double worst = 0;
#pragma omp parallel num_threads(threads) reduction(max : worst)
  {
    Scratch s = make_scratch(m);
#pragma omp for schedule(static)
    for (long long node = 0; node < static_cast<long long>(nodes); ++node) {
      m.lat.node_coords(static_cast<size_t>(node), s.buf.data());
      for (const auto& y : m.Y) {
        std::copy(y.begin(), y.end(), s.buf.begin() + m.demon_at);
        for (const auto& z : m.Z) {
          std::copy(z.begin(), z.end(), s.buf.begin() + m.angel_at);
          for (size_t i = 0; i < m.f.size(); ++i) {
            int d = m.state_axis[i];
            if (m.lat.n[d] <= 1) continue;
            double r = std::abs(dt * m.f[i](s.buf.data())) / m.lat.h[d];
            if (!(r <= worst)) worst = std::isnan(r) ? kInf : r;
          }
        }
      }
    }
  }
  return worst;
}

std::vector<double> terminal_layer(const GridSpec& grid, const Term& payoff, const RatEnv& params) {
  std::vector<Var> slots;
  for (const GridAxis& a : grid.axes) slots.push_back(a.var);
  std::vector<double> buf;
  append_params(slots, buf, params);
  CompiledTerm g = compile(payoff, slots, "payoff");
  Lattice lat(grid);
  std::vector<double> out(grid.size());
  // Exact at the exact nodes, rounded once; compiled floating point otherwise.
  RatEnv env = params;
  for (size_t i = 0; i < out.size(); ++i) {
    std::vector<int> idx = grid.index(i);
    for (int d = 0; d < grid.dims(); ++d) env[grid.axes[d].var] = grid.exact_coord(d, idx[d]);
    if (auto q = eval_exact(payoff, env)) {
      out[i] = to_double(*q);
    } else {
      lat.node_coords(i, buf.data());
      out[i] = g(buf.data());
    }
  }
  return out;
}

ValueGrid solve_core(const Game& g, std::vector<double> terminal, const IsaacsConfig& cfg, const Orientation& o,
                     bool parallel) {
  IsaacsModel m(g, cfg);
  ValueGrid vg;
  vg.grid = cfg.grid;
  vg.T = cfg.T;
  vg.dt = cfg.dt;
  vg.steps = steps_for(cfg.T, cfg.dt);
  vg.flavor = {o.kind, o.frozen};
  const size_t nodes = cfg.grid.size();
  if (terminal.size() != nodes) throw OracleError("terminal layer has wrong size");
  int threads = parallel ? std::max(1, cfg.threads) : 1;

  double ratio = cfl_ratio(m, cfg.dt, nodes, threads);
  if (ratio > 1 + 1e-9) {
    double suggest = cfg.dt / ratio;
    double p = std::pow(10.0, std::floor(std::log10(suggest)) - 1);
    suggest = std::floor(suggest / p) * p;
    throw OracleError("dt = " + fmt(cfg.dt) + " moves foot points " + fmt(ratio, 4) +
                      " cells; use dt <= " + fmt(suggest, 3));
  }

  vg.V.assign(vg.steps + 1, {});
  vg.V[vg.steps] = std::move(terminal);
  std::size_t ood = 0;
  for (int k = vg.steps - 1; k >= 0; --k) {
    const std::vector<double>& next = vg.V[k + 1];
    std::vector<double> cur(nodes);
    if (parallel) {
#pragma omp parallel num_threads(threads) reduction(+ : ood)
      {
        Scratch s = make_scratch(m);
#pragma omp for schedule(static)
        for (long long node = 0; node < static_cast<long long>(nodes); ++node)
          cur[node] = step_node(m, next, static_cast<size_t>(node), cfg.dt, o, s, ood);
      }
    } else {
      Scratch s = make_scratch(m);
      for (size_t node = 0; node < nodes; ++node) cur[node] = step_node(m, next, node, cfg.dt, o, s, ood);
    }
    vg.V[k] = std::move(cur);
  }
  vg.out_of_domain = ood;
  return vg;
}

}  // namespace

ValueGrid solve_isaacs_serial(const Game& g, const Term& payoff, const IsaacsConfig& cfg, Flavor flavor) {
  ValueGrid vg = solve_core(g, terminal_layer(cfg.grid, payoff, cfg.params), cfg,
                            {true, flavor.kind, flavor.frozen}, false);
  vg.payoff = payoff;
  return vg;
}

ValueGrid solve_isaacs_parallel(const Game& g, const Term& payoff, const IsaacsConfig& cfg, Flavor flavor) {
  ValueGrid vg = solve_core(g, terminal_layer(cfg.grid, payoff, cfg.params), cfg,
                            {true, flavor.kind, flavor.frozen}, true);
  vg.payoff = payoff;
  return vg;
}

ValueGrid solve_isaacs(const Game& g, const Term& payoff, const IsaacsConfig& cfg, Flavor flavor) {
  return cfg.threads > 1 ? solve_isaacs_parallel(g, payoff, cfg, flavor) : solve_isaacs_serial(g, payoff, cfg, flavor);
}

std::string to_string(SignVerdict v) {
  switch (v) {
    case SignVerdict::DemonWins: return "demon-wins";
    case SignVerdict::AngelWins: return "angel-wins";
    default: return "inconclusive";
  }
}

SignVerdict value_sign_verdict(const ValueGrid& vg, const std::vector<double>& xi, Openness mode, double tau) {
  double v = vg.initial(xi);
  if (mode == Openness::Open) {
    if (v > tau) return SignVerdict::DemonWins;
    if (v < -tau) return SignVerdict::AngelWins;
    return SignVerdict::Inconclusive;
  }
  return v >= -tau ? SignVerdict::DemonWins : SignVerdict::AngelWins;
}

Formula relax_formula(const Formula& f, Openness mode) {
  Formula n = nnf(f);
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    switch (g->kind) {
      case FormulaKind::Cmp: {
        CmpOp op = g->op;
        if (mode == Openness::Open) {
          if (op == CmpOp::Ge) return mk_cmp(CmpOp::Gt, g->lhs, g->rhs);
          if (op == CmpOp::Le) return mk_cmp(CmpOp::Lt, g->lhs, g->rhs);
          if (op == CmpOp::Eq) return mk_false();
        } else {
          if (op == CmpOp::Gt) return mk_cmp(CmpOp::Ge, g->lhs, g->rhs);
          if (op == CmpOp::Lt) return mk_cmp(CmpOp::Le, g->lhs, g->rhs);
          if (op == CmpOp::Ne) return mk_true();
        }
        return g;
      }
      case FormulaKind::And: return mk_and(go(g->a), go(g->b));
      case FormulaKind::Or: return mk_or(go(g->a), go(g->b));
      case FormulaKind::True:
      case FormulaKind::False: return g;
      default: throw OracleError("relaxation needs a quantifier-free first-order formula");
    }
  };
  return go(n);
}

// --- winning regions ------------------------------------------------------------------

GridSet complement(const GridSet& s) {
  GridSet out(s.size());
  for (size_t i = 0; i < s.size(); ++i) out[i] = !s[i];
  return out;
}

namespace {

RatEnv node_env(const GridSpec& grid, size_t flat, const RatEnv& params) {
  RatEnv env = params;
  std::vector<int> idx = grid.index(flat);
  for (int d = 0; d < grid.dims(); ++d) env[grid.axes[d].var] = grid.exact_coord(d, idx[d]);
  return env;
}

bool holds_at(const Formula& f, const RatEnv& env) {
  auto r = holds_exact(f, env);
  if (r) return *r;
  DblEnv d;
  for (const auto& [k, q] : env) d[k] = to_double(q);
  return holds_double(f, d);
}

GridSet set_op(const GridSet& a, const GridSet& b, bool conj) {
  GridSet out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = conj ? (a[i] && b[i]) : (a[i] || b[i]);
  return out;
}

// Quantifies axis d: every (all) or some node along the axis.
GridSet quantify(const GridSpec& grid, const GridSet& X, int d, bool all) {
  GridSet out(X.size());
  for (size_t i = 0; i < X.size(); ++i) {
    std::vector<int> idx = grid.index(i);
    bool acc = all;
    for (int k = 0; k < grid.axes[d].nodes; ++k) {
      idx[d] = k;
      bool v = X[grid.flat(idx)];
      if (all ? !v : v) {
        acc = !all;
        break;
      }
    }
    out[i] = acc;
  }
  return out;
}

int axis_or_throw(const GridSpec& grid, const Var& v) {
  int d = grid.axis_of(v);
  if (d < 0) throw OracleError("variable " + to_string(v) + " has no grid axis");
  return d;
}

GridSet region(const Game& g, const GridSet& X, Player p, const RegionConfig& cfg);

GridSet diffgame_region(const Game& g, const GridSet& X, Player p, const RegionConfig& cfg) {
  std::vector<double> terminal(X.size());
  for (size_t i = 0; i < X.size(); ++i) terminal[i] = X[i] ? 1.0 : -1.0;
  Orientation o{p == Player::Demon, ValueKind::Lower, true};
  ValueGrid vg = solve_core(g, std::move(terminal), cfg.isaacs, o, cfg.isaacs.threads > 1);
  GridSet out(X.size());
  for (size_t i = 0; i < X.size(); ++i)
    out[i] = p == Player::Demon ? vg.V[0][i] > cfg.tau : vg.V[0][i] >= -cfg.tau;
  return out;
}

GridSet region(const Game& g, const GridSet& X, Player p, const RegionConfig& cfg) {
  const GridSpec& grid = cfg.isaacs.grid;
  switch (g->kind) {
    case GameKind::DiffGame: return diffgame_region(g, X, p, cfg);
    case GameKind::Assign: {
      int d = axis_or_throw(grid, g->var);
      const GridAxis& ax = grid.axes[d];
      Rational h = grid.exact_step(d);
      GridSet out(X.size());
      std::vector<Var> slots;
      for (const GridAxis& a : grid.axes) slots.push_back(a.var);
      for (size_t i = 0; i < X.size(); ++i) {
        RatEnv env = node_env(grid, i, cfg.isaacs.params);
        int k = 0;
        if (ax.nodes > 1) {
          auto q = eval_exact(g->term, env);
          double u;
          if (q) {
            Rational r = (*q - ax.lo) / h + Rational(1, 2);
            mpz_class fl;
            mpz_fdiv_q(fl.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
            u = fl.get_d();
          } else {
            DblEnv de;
            for (const auto& [kv, qv] : env) de[kv] = to_double(qv);
            u = std::floor((eval_double(g->term, de) - to_double(ax.lo)) / to_double(h) + 0.5);
          }
          k = static_cast<int>(std::clamp(u, 0.0, static_cast<double>(ax.nodes - 1)));
        }
        std::vector<int> idx = grid.index(i);
        idx[d] = k;
        out[i] = X[grid.flat(idx)];
      }
      return out;
    }
    case GameKind::RandomAssign: return quantify(grid, X, axis_or_throw(grid, g->var), p == Player::Demon);
    case GameKind::Test: {
      GridSet P = grid_semantics(g->test, cfg);
      return p == Player::Angel ? set_op(P, X, true) : set_op(complement(P), X, false);
    }
    case GameKind::Choice:
      return set_op(region(g->a, X, p, cfg), region(g->b, X, p, cfg), p == Player::Demon);
    case GameKind::Seq: return region(g->a, region(g->b, X, p, cfg), p, cfg);
    case GameKind::Repeat: {
      // Angel: least Z with X u W(Z) <= Z; Demon: greatest Z with Z <= X n W(Z).
      GridSet Z = X;
      for (;;) {
        GridSet next = set_op(X, region(g->a, Z, p, cfg), p == Player::Demon);
        if (next == Z) return Z;
        Z = std::move(next);
      }
    }
    case GameKind::Dual: return region(g->a, X, p == Player::Angel ? Player::Demon : Player::Angel, cfg);
  }
  throw OracleError("unknown game");
}

}  // namespace

GridSet sample_formula(const Formula& f, const GridSpec& grid, const RatEnv& params) {
  if (!is_first_order(f) || !is_quantifier_free(f)) throw OracleError("sampling needs a quantifier-free formula");
  GridSet out(grid.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = holds_at(f, node_env(grid, i, params));
  return out;
}

GridSet winning_region(const Game& g, const GridSet& X, Player player, const RegionConfig& cfg) {
  if (X.size() != cfg.isaacs.grid.size()) throw OracleError("target set has wrong size");
  return region(g, X, player, cfg);
}

GridSet grid_semantics(const Formula& f, const RegionConfig& cfg) {
  const GridSpec& grid = cfg.isaacs.grid;
  if (is_first_order(f) && is_quantifier_free(f)) return sample_formula(f, grid, cfg.isaacs.params);
  switch (f->kind) {
    case FormulaKind::Not: return complement(grid_semantics(f->a, cfg));
    case FormulaKind::And: return set_op(grid_semantics(f->a, cfg), grid_semantics(f->b, cfg), true);
    case FormulaKind::Or: return set_op(grid_semantics(f->a, cfg), grid_semantics(f->b, cfg), false);
    case FormulaKind::Imply:
      return set_op(complement(grid_semantics(f->a, cfg)), grid_semantics(f->b, cfg), false);
    case FormulaKind::Equiv: {
      GridSet a = grid_semantics(f->a, cfg), b = grid_semantics(f->b, cfg);
      GridSet out(a.size());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] == b[i];
      return out;
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return quantify(grid, grid_semantics(f->a, cfg), axis_or_throw(grid, f->bound),
                      f->kind == FormulaKind::Forall);
    case FormulaKind::Box: return region(f->game, grid_semantics(f->a, cfg), Player::Demon, cfg);
    case FormulaKind::Diamond: return region(f->game, grid_semantics(f->a, cfg), Player::Angel, cfg);
    default: throw OracleError("unexpected formula in grid semantics");
  }
}

std::size_t differences_off_boundary(const GridSpec& grid, const GridSet& a, const GridSet& b) {
  if (a.size() != b.size() || a.size() != grid.size()) throw OracleError("grid sets of different sizes");
  const int D = grid.dims();
  std::size_t count = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    std::vector<int> idx = grid.index(i);
    bool near = false;
    // All offsets in {-1,0,1}^D.
    std::vector<int> off(D, -1);
    for (;;) {
      std::vector<int> j = idx;
      bool inside = true;
      for (int d = 0; d < D; ++d) {
        j[d] += off[d];
        if (j[d] < 0 || j[d] >= grid.axes[d].nodes) inside = false;
      }
      if (inside && a[grid.flat(j)] != a[i]) {
        near = true;
        break;
      }
      int d = D - 1;
      while (d >= 0 && off[d] == 1) off[d--] = -1;
      if (d < 0) break;
      ++off[d];
    }
    if (!near) ++count;
  }
  return count;
}

// --- rollouts ---------------------------------------------------------------------

RolloutReport simulate_feedback(const Game& g, const std::vector<std::pair<Var, Term>>& witness, AngelPolicy policy,
                                const std::vector<double>& xi, const Formula& monitor, const RolloutConfig& cfg) {
  Dynamics dyn(g, cfg.params);
  if (xi.size() != dyn.n) throw OracleError("initial state has wrong dimension");

  std::vector<CompiledTerm> wit(g->demon.size());
  std::vector<bool> have(g->demon.size(), false);
  for (const auto& [v, t] : witness) {
    auto it = std::find(g->demon.begin(), g->demon.end(), v);
    if (it == g->demon.end()) throw OracleError("witness assigns " + to_string(v) + ", not a Demon control");
    size_t i = it - g->demon.begin();
    wit[i] = compile(t, dyn.slots, "witness");
    have[i] = true;
  }
  for (size_t i = 0; i < have.size(); ++i)
    if (!have[i]) throw OracleError("witness misses Demon control " + to_string(g->demon[i]));

  // Demon set membership within tolerance.
  std::function<bool(const double*)> in_Y;
  if (g->demon.empty()) {
    in_Y = [](const double*) { return true; };
  } else {
    try {
      auto ar = arithmetize(g->demon_set);
      auto ct = std::make_shared<CompiledTerm>(compile(ar.term, dyn.slots, "Demon set"));
      double tol = cfg.tolerance;
      in_Y = [ct, tol](const double* b) { return (*ct)(b) >= -tol; };
    } catch (const ArithmetizeError&) {
      auto cf = std::make_shared<CompiledFormula>(g->demon_set, dyn.slots);
      in_Y = [cf](const double* b) { return (*cf)(b); };
    }
  }

  // Monitor value and violation test.
  std::function<double(const double*)> mon_value;
  std::function<bool(double)> violated;
  try {
    auto ar = arithmetize(monitor);
    auto ct = std::make_shared<CompiledTerm>(compile(ar.term, dyn.slots, "monitor"));
    mon_value = [ct](const double* b) { return (*ct)(b); };
    double tol = cfg.tolerance;
    if (ar.mode == ArithMode::Open)
      violated = [](double v) { return !(v > 0); };
    else
      violated = [tol](double v) { return !(v >= -tol); };
  } catch (const ArithmetizeError&) {
    auto cf = std::make_shared<CompiledFormula>(monitor, dyn.slots);
    mon_value = [cf](const double* b) { return (*cf)(b) ? 1.0 : -1.0; };
    violated = [](double v) { return v < 0; };
  } catch (const EvalError& e) {
    throw OracleError(std::string("monitor: ") + e.what());
  }

  std::vector<std::vector<double>> Z = control_grid(g->angel, g->angel_set, cfg.resolution_angel, cfg.params).points;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<size_t> pick(0, Z.size() - 1);

  int steps = steps_for(cfg.T, cfg.dt);
  RolloutReport rep;
  Trajectory& tr = rep.trajectory;
  tr.dt = cfg.dt;
  tr.states = g->states;
  tr.demon_vars = g->demon;
  tr.angel_vars = g->angel;
  std::vector<double> buf = dyn.base, x = xi, trial(dyn.n), tbuf;
  auto load_state = [&](std::vector<double>& b, const std::vector<double>& s) {
    std::copy(s.begin(), s.end(), b.begin());
  };

  for (int k = 0;; ++k) {
    double t = k * cfg.dt;
    load_state(buf, x);
    tr.times.push_back(t);
    tr.points.push_back(x);
    if (violated(mon_value(buf.data()))) {
      rep.violated = true;
      rep.violation_time = t;
      rep.violation_state = x;
      return rep;
    }
    if (k == steps) break;

    std::vector<double> y(g->demon.size());
    for (size_t i = 0; i < y.size(); ++i) {
      y[i] = wit[i](buf.data());
      if (!std::isfinite(y[i])) throw OracleError("witness undefined at t = " + fmt(t));
      buf[dyn.demon_at + i] = y[i];
    }
    if (!in_Y(buf.data())) throw OracleError("witness leaves Demon's control set at t = " + fmt(t));

    size_t choice = 0;
    if (policy == AngelPolicy::Random) {
      choice = pick(rng);
    } else {
      double worst = kInf;
      for (size_t j = 0; j < Z.size(); ++j) {
        tbuf = buf;
        std::copy(Z[j].begin(), Z[j].end(), tbuf.begin() + dyn.angel_at);
        trial = x;
        dyn.rk4(tbuf, trial.data(), cfg.dt);
        double v = mon_value(tbuf.data());
        if (v < worst) {
          worst = v;
          choice = j;
        }
      }
    }
    std::copy(Z[choice].begin(), Z[choice].end(), buf.begin() + dyn.angel_at);
    tr.demon.push_back(y);
    tr.angel.push_back(Z[choice]);
    dyn.rk4(buf, x.data(), cfg.dt);
  }
  return rep;
}

// --- exports ----------------------------------------------------------------------

void write_value_csv(const ValueGrid& vg, std::ostream& out) {
  out << "t";
  for (const GridAxis& a : vg.grid.axes) out << ',' << to_string(a.var);
  out << ",V\n";
  Lattice lat(vg.grid);
  std::vector<double> c(lat.D);
  for (int k = 0; k <= vg.steps; ++k) {
    std::string t = fmt(k * vg.dt);
    for (size_t i = 0; i < vg.V[k].size(); ++i) {
      lat.node_coords(i, c.data());
      out << t;
      for (double v : c) out << ',' << fmt(v);
      out << ',' << fmt(vg.V[k][i], 17) << '\n';
    }
  }
}

namespace {

template <class T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw OracleError("truncated value file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_value_binary(const ValueGrid& vg, std::ostream& out) {
  out.write("DHGV", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vg.grid.dims()));
  for (const GridAxis& a : vg.grid.axes) {
    put<double>(out, to_double(a.lo));
    put<double>(out, to_double(a.hi));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.nodes));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vg.steps));
  put<double>(out, vg.dt);
  for (const auto& layer : vg.V)
    for (double v : layer) put<double>(out, v);
}

ValueGrid read_value_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "DHGV", 4) != 0) throw OracleError("not a value file");
  if (get<std::uint32_t>(in) != 1) throw OracleError("unsupported value file version");
  ValueGrid vg;
  std::uint32_t dims = get<std::uint32_t>(in);
  for (std::uint32_t d = 0; d < dims; ++d) {
    GridAxis a;
    a.var = Var{"x", static_cast<int>(d + 1)};
    a.lo = from_double(get<double>(in));
    a.hi = from_double(get<double>(in));
    a.nodes = static_cast<int>(get<std::uint32_t>(in));
    vg.grid.axes.push_back(a);
  }
  vg.steps = static_cast<int>(get<std::uint32_t>(in));
  vg.dt = get<double>(in);
  vg.T = vg.steps * vg.dt;
  size_t nodes = vg.grid.size();
  vg.V.assign(vg.steps + 1, std::vector<double>(nodes));
  for (auto& layer : vg.V)
    for (double& v : layer) v = get<double>(in);
  return vg;
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& out) {
  out << "t";
  for (const Var& v : tr.states) out << ',' << to_string(v);
  size_t nd = tr.demon.empty() ? 0 : tr.demon[0].size();
  size_t na = tr.angel.empty() ? 0 : tr.angel[0].size();
  for (size_t i = 0; i < nd; ++i) out << ',' << (i < tr.demon_vars.size() ? to_string(tr.demon_vars[i]) : "demon");
  for (size_t i = 0; i < na; ++i) out << ',' << (i < tr.angel_vars.size() ? to_string(tr.angel_vars[i]) : "angel");
  out << '\n';
  for (size_t k = 0; k < tr.times.size(); ++k) {
    out << fmt(tr.times[k]);
    for (double v : tr.points[k]) out << ',' << fmt(v, 12);
    for (size_t i = 0; i < nd; ++i) out << ',' << (k < tr.demon.size() ? fmt(tr.demon[k][i], 12) : "");
    for (size_t i = 0; i < na; ++i) out << ',' << (k < tr.angel.size() ? fmt(tr.angel[k][i], 12) : "");
    out << '\n';
  }
}

void write_region_csv(const GridSpec& grid, const GridSet& s, std::ostream& out) {
  for (const GridAxis& a : grid.axes) out << to_string(a.var) << ',';
  out << "in\n";
  Lattice lat(grid);
  std::vector<double> c(lat.D);
  for (size_t i = 0; i < s.size(); ++i) {
    lat.node_coords(i, c.data());
    for (double v : c) out << fmt(v) << ',';
    out << int(s[i] != 0) << '\n';
  }
}

}  // namespace dhg
