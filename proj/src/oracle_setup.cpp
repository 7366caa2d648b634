#include "dhg/oracle_setup.hpp"

#include "dhg/symbolic.hpp"

namespace dhg {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_items(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(' || ch == '[' || ch == '{') ++depth;
    if (ch == ')' || ch == ']' || ch == '}') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void key_error(const std::string& key, const std::string& msg) {
  throw DhgError("oracle key '" + key + "': " + msg, 0);
}

double number(const std::string& key, const std::string& text) {
  try {
    return to_double(parse_rational(trim(text)));
  } catch (const std::exception&) {
    key_error(key, "expected a number, got '" + text + "'");
  }
}

std::vector<std::pair<Var, std::pair<Rational, Rational>>> box_axes(const RationalBox& b) {
  return {b.bounds.begin(), b.bounds.end()};
}

}  // namespace

Formula find_modality(const Formula& f, bool diffgame_only) {
  if (!f) return nullptr;
  if ((f->kind == FormulaKind::Box || f->kind == FormulaKind::Diamond) &&
      (!diffgame_only || f->game->kind == GameKind::DiffGame))
    return f;
  switch (f->kind) {
    case FormulaKind::Imply:
    case FormulaKind::And:
    case FormulaKind::Or:
      if (auto r = find_modality(f->b, diffgame_only)) return r;
      return find_modality(f->a, diffgame_only);
    case FormulaKind::Not:
    case FormulaKind::Forall:
    case FormulaKind::Exists: return find_modality(f->a, diffgame_only);
    default: return nullptr;
  }
}

RatEnv parse_point(const std::string& text, const ParseContext& ctx) {
  RatEnv env;
  for (const std::string& item : split_items(text)) {
    size_t eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected `NAME=value`, got '" + item + "'");
    std::vector<Var> vars = parse_var_list(trim(item.substr(0, eq)), ctx);
    std::vector<Term> vals = parse_vector_term(trim(item.substr(eq + 1)), ctx);
    if (vals.size() != vars.size()) throw std::invalid_argument("dimension mismatch in '" + item + "'");
    for (size_t i = 0; i < vars.size(); ++i) {
      auto q = eval_exact(vals[i], env);
      if (!q) throw std::invalid_argument("value of " + to_string(vars[i]) + " is not an exact rational");
      env[vars[i]] = *q;
    }
  }
  return env;
}

const std::vector<std::pair<Var, Term>>& OracleSetup::witness(const std::string& name) const {
  auto it = witnesses.find(name);
  if (it == witnesses.end()) throw OracleError("no witness named '" + name + "'");
  return it->second;
}

std::vector<double> OracleSetup::grid_point(const RatEnv& values) const {
  std::vector<double> x;
  for (const GridAxis& a : isaacs.grid.axes) {
    auto it = values.find(a.var);
    if (it == values.end()) throw OracleError("no value for grid axis " + to_string(a.var));
    x.push_back(to_double(it->second));
  }
  return x;
}

OracleSetup oracle_setup(const DhgFile& file, const OracleOverrides& over) {
  OracleSetup s;
  const ParseContext& ctx = file.ctx;
  ParseContext wctx = ctx;
  wctx.allow_witness = true;
  auto get = [&](const std::string& k) { return file.oracle_value(k); };
  auto guarded = [&](const std::string& key, auto&& fn) {
    try {
      return fn();
    } catch (const DhgError&) {
      throw;
    } catch (const std::exception& e) {
      key_error(key, e.what());
    }
  };

  if (Formula m = find_modality(file.script.goal, false)) {
    s.modal_game = m->game;
    s.modal_post = m->a;
    s.modal_player = m->kind == FormulaKind::Box ? Player::Demon : Player::Angel;
  }

  // differential game and its postcondition
  if (auto g = get("game")) {
    s.game = guarded("game", [&] { return parse_game(*g, ctx); });
    if (s.game->kind != GameKind::DiffGame) key_error("game", "expected a differential game");
    s.player = Player::Demon;
    if (auto p = get("player")) {
      if (*p == "angel") s.player = Player::Angel;
      else if (*p != "demon") key_error("player", "expected demon or angel");
    }
  } else if (Formula m = find_modality(file.script.goal, true)) {
    s.game = m->game;
    s.post = m->a;
    s.player = m->kind == FormulaKind::Box ? Player::Demon : Player::Angel;
  }
  if (auto p = get("post")) s.post = guarded("post", [&] { return parse_formula(*p, ctx); });

  // payoff: Demon maximizes, its sign encodes Demon's side of the goal
  if (s.post) {
    Formula demon_goal = s.player == Player::Demon ? s.post : nnf(mk_not(s.post));
    if (is_atomically_open(demon_goal)) s.openness = Openness::Open;
    if (over.relax) {
      Arithmetization a = arithmetize(relax_formula(demon_goal, *over.relax));
      s.payoff = a.term;
      s.openness = *over.relax;
    } else if (auto p = get("payoff")) {
      s.payoff = guarded("payoff", [&] { return parse_term(*p, ctx); });
    } else {
      try {
        Arithmetization a = arithmetize(demon_goal);
        s.payoff = a.term;
        s.openness = a.mode == ArithMode::Open ? Openness::Open : Openness::Closed;
      } catch (const ArithmetizeError&) {
        // mixed postconditions get no default payoff; relax them first
      }
    }
  }

  // grid
  std::string box_text = over.box ? *over.box : get("box").value_or("");
  if (!box_text.empty()) {
    RationalBox b = guarded("box", [&] { return parse_region(box_text, ctx); });
    Rational dx;
    if (over.dx) dx = *over.dx;
    else if (auto d = get("dx")) dx = guarded("dx", [&] { return parse_rational(*d); });
    else key_error("dx", "missing grid spacing");
    s.isaacs.grid = guarded("box", [&] { return make_grid(box_axes(b), dx); });
  }
  s.isaacs.T = over.T ? *over.T : get("T") ? number("T", *get("T")) : 1.0;
  s.isaacs.dt = over.dt ? *over.dt : get("dt") ? number("dt", *get("dt")) : 0.01;
  int res = 4;
  if (auto r = get("resolution")) res = static_cast<int>(number("resolution", *r));
  if (over.resolution) res = *over.resolution;
  s.isaacs.resolution_demon = s.isaacs.resolution_angel = res;
  if (auto r = get("resolution_demon"); r && !over.resolution)
    s.isaacs.resolution_demon = static_cast<int>(number("resolution_demon", *r));
  if (auto r = get("resolution_angel"); r && !over.resolution)
    s.isaacs.resolution_angel = static_cast<int>(number("resolution_angel", *r));
  if (auto p = get("params")) s.isaacs.params = guarded("params", [&] { return parse_point(*p, wctx); });
  s.isaacs.threads = std::max(1, over.threads);

  // witnesses and monitor
  for (const auto& [k, v] : file.oracle) {
    std::string name;
    if (k == "witness") name = "default";
    else if (k == "wrong_witness") name = "wrong";
    else if (k.rfind("witness.", 0) == 0) name = k.substr(8);
    else continue;
    s.witnesses[name] = guarded(k, [&] { return parse_assignments(v, wctx); });
  }
  if (auto m = get("monitor")) s.monitor = guarded("monitor", [&] { return parse_formula(*m, ctx); });
  else if (auto i = get("invariant")) s.monitor = guarded("invariant", [&] { return parse_formula(*i, ctx); });
  else s.monitor = s.post;

  if (auto st = get("start")) {
    RatEnv p = guarded("start", [&] { return parse_point(*st, ctx); });
    if (!s.game) key_error("start", "no differential game");
    std::vector<double> xi;
    for (const Var& v : s.game->states) {
      auto it = p.find(v);
      if (it == p.end()) key_error("start", "missing state " + to_string(v));
      xi.push_back(to_double(it->second));
    }
    s.start = xi;
    s.start_env = p;
  }

  for (const auto& [k, v] : file.oracle)
    if (k == "check") s.checks.push_back(guarded("check", [&] { return parse_region(v, ctx); }));
  if (s.checks.empty())
    for (const NamedRegion& r : file.script.regions) s.checks.push_back(r.box);

  if (auto r = get("rollout_T")) s.rollout_T = number("rollout_T", *r);
  if (auto r = get("rollout_dt")) s.rollout_dt = number("rollout_dt", *r);
  if (auto r = get("seed")) s.seed = static_cast<std::uint64_t>(number("seed", *r));
  if (auto r = get("tau")) s.tau = number("tau", *r);

  static const std::vector<std::string> known = {
      "box", "dx", "dt", "T", "resolution", "resolution_demon", "resolution_angel", "params", "game", "player",
      "post", "payoff", "witness", "wrong_witness", "monitor", "invariant", "start", "check", "rollout_T",
      "rollout_dt", "seed", "tau"};
  for (const auto& [k, v] : file.oracle)
    if (std::find(known.begin(), known.end(), k) == known.end() && k.rfind("witness.", 0) != 0)
      key_error(k, "unknown key");
  return s;
}

}  // namespace dhg
