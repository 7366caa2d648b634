// dhg: batch front-end for proof checking, premises, SMT export and the value oracle.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dhg/dhgfile.hpp"
#include "dhg/oracle_setup.hpp"
#include "dhg/printer.hpp"

using namespace dhg;

namespace {

constexpr int kUsageError = 1;

// Finds the first modality of the requested kind by walking implications and conjunctions.
Formula find_modal(const Formula& f, FormulaKind kind) {
  if (!f) return nullptr;
  if (f->kind == kind && f->game->kind == GameKind::DiffGame) return f;
  switch (f->kind) {
    case FormulaKind::Imply:
    case FormulaKind::And:
    case FormulaKind::Or:
      if (auto r = find_modal(f->b, kind)) return r;
      return find_modal(f->a, kind);
    case FormulaKind::Not:
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return find_modal(f->a, kind);
    default:
      return nullptr;
  }
}

const RuleApplication* find_rule(const std::vector<ProofStep>& steps, const std::string& rule) {
  for (const auto& s : steps) {
    if (!s.open && s.app.rule == rule) return &s.app;
    for (const auto& [_, sub] : s.cases)
      if (auto r = find_rule(sub, rule)) return r;
  }
  return nullptr;
}

Formula premise_for(const DhgFile& file, const std::string& rule) {
  if (rule == "dgi") {
    Formula m = find_modal(file.script.goal, FormulaKind::Box);
    if (!m) throw RuleError("the goal has no [g]F with a differential game");
    return dgi_premise(m->a, m->game);
  }
  if (rule == "dgv") {
    Formula m = find_modal(file.script.goal, FormulaKind::Diamond);
    if (!m) throw RuleError("the goal has no <g>F with a differential game");
    const Formula& post = m->a;
    if (post->kind != FormulaKind::Cmp || post->op != CmpOp::Ge)
      throw RuleError("DGV needs a postcondition g >= 0");
    Term g = post->rhs->kind == TermKind::Const && post->rhs->value == 0 ? post->lhs : mk_sub(post->lhs, post->rhs);
    return dgv_premise(g, m->game);
  }
  Formula m = find_modal(file.script.goal, FormulaKind::Box);
  const RuleApplication* app = find_rule(file.script.steps, "DGR");
  if (!m || !app) throw RuleError("DGR premise needs a [g]F goal and a DGR step naming the other game");
  return dgr_premise(m->game, app->game);
}

// `x=-3:3, l=-1:1` or region syntax `x in [-3,3]`.
std::string box_arg(const std::string& text) {
  if (text.find(" in ") != std::string::npos) return text;
  std::string out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t eq = item.find('='), colon = item.rfind(':');
    if (eq == std::string::npos || colon == std::string::npos || colon < eq)
      throw std::invalid_argument("expected VAR=lo:hi in --box, got '" + item + "'");
    if (!out.empty()) out += ", ";
    out += item.substr(0, eq) + " in [" + item.substr(eq + 1, colon - eq - 1) + "," + item.substr(colon + 1) + "]";
  }
  return out;
}

std::ostream& open_out(const std::string& path, std::ofstream& file, bool binary = false) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, binary ? std::ios::binary : std::ios::out);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

std::string point_text(const std::vector<Var>& vars, const std::vector<double>& x) {
  std::ostringstream o;
  o.precision(10);
  for (size_t i = 0; i < vars.size(); ++i) o << (i ? ", " : "") << to_string(vars[i]) << "=" << x[i];
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dhg: differential game logic proof checker and value oracle"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for parallel kernels")->check(CLI::PositiveNumber);

  std::string path;
  std::string emit_dir, solver = "file";
  double timeout = -1;
  auto* check = app.add_subcommand("check", "check the proof script of a .dhg file");
  check->add_option("file", path, ".dhg file")->required();
  check->add_option("--emit-smt", emit_dir, "write undischarged side conditions as SMT-LIB files");
  check->add_option("--solver", solver, "external solver: file (per-file option), z3 or none")
      ->check(CLI::IsMember({"file", "z3", "none"}));
  check->add_option("--timeout", timeout, "external solver timeout in seconds");

  std::string rule = "dgi";
  auto* premise = app.add_subcommand("premise", "print the premise of a differential game rule for the goal");
  premise->add_option("file", path, ".dhg file")->required();
  premise->add_option("--rule", rule)->check(CLI::IsMember({"dgi", "dgv", "dgr"}));
  bool as_smt = false;
  premise->add_flag("--smt", as_smt, "print as an SMT-LIB validity query");

  // oracle runs share grid flags
  double T = -1, dt = -1, tau = -1;
  std::string box, dx, out, at, relax, flavor = "lower";
  int resolution = -1;
  bool plain = false;
  auto grid_flags = [&](CLI::App* sub) {
    sub->add_option("file", path, ".dhg file")->required();
    sub->add_option("-T", T, "horizon");
    sub->add_option("--box", box, "grid box, e.g. x=-3:3 or 'x in [-3,3]'");
    sub->add_option("--dx", dx, "grid spacing (exact decimal or fraction)");
    sub->add_option("--dt", dt, "time step");
    sub->add_option("--resolution", resolution, "control samples per axis");
    sub->add_option("--relax", relax, "payoff from the interior (open) or closure (closed) of a mixed postcondition")
        ->check(CLI::IsMember({"open", "closed"}));
    sub->add_option("--tau", tau, "verdict threshold");
    sub->add_option("--out", out, "output file (default stdout)");
  };
  auto* value = app.add_subcommand("value", "solve the Isaacs scheme for the file's differential game");
  grid_flags(value);
  value->add_option("--flavor", flavor, "lower or upper value")->check(CLI::IsMember({"lower", "upper"}));
  value->add_flag("--plain", plain, "do not freeze (Angel cannot stop early)");
  value->add_option("--at", at, "report V(0,.) and its sign verdict here (default: oracle start)");

  std::string player;
  auto* region = app.add_subcommand("region", "grid winning region of the goal's game");
  grid_flags(region);
  region->add_option("--player", player, "demon or angel (default: the goal's modality)")
      ->check(CLI::IsMember({"demon", "angel"}));

  std::string witness = "default", policy = "adversarial", plot, start;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "roll out Demon's feedback witness against Angel");
  simulate->add_option("file", path, ".dhg file")->required();
  simulate->add_option("--witness", witness, "witness name from the oracle section (default, wrong, NAME)");
  simulate->add_option("--policy", policy, "Angel policy")->check(CLI::IsMember({"random", "adversarial"}));
  simulate->add_option("-T", T, "horizon");
  simulate->add_option("--dt", dt, "integration step");
  simulate->add_option("--seed", seed, "seed for the random policy");
  simulate->add_option("--start", start, "initial state, e.g. x=1.1");
  simulate->add_option("--plot-data", plot, "write the trajectory as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    DhgFile file = load_dhg(path);
    file.script.backend.forall.threads = threads;
    file.script.backend.exists.threads = threads;
    if (*check) {
      if (!file.has_proof) throw DhgError("no proof section", 0);
      BackendConfig& cfg = file.script.backend;
      if (solver != "file") cfg.external_solver = solver == "z3";
      if (timeout > 0) cfg.solver_timeout = timeout;
      if (!emit_dir.empty()) {
        cfg.emit_smt_dir = emit_dir;
        cfg.smt_prefix = std::filesystem::path(path).stem().string() + ".";
      }
      ProofResult r = check_proof(file.script);
      std::cout << report(r);
      return exit_code(r.status);
    }
    if (*premise) {
      Formula p = premise_for(file, rule);
      std::cout << (as_smt ? export_smtlib(p) : print(p) + "\n");
      return 0;
    }

    OracleOverrides over;
    over.threads = threads;
    if (T > 0 && !*simulate) over.T = T;
    if (dt > 0 && !*simulate) over.dt = dt;
    if (!box.empty()) over.box = box_arg(box);
    if (!dx.empty()) over.dx = parse_rational(dx);
    if (resolution > 0) over.resolution = resolution;
    if (!relax.empty()) over.relax = relax == "open" ? Openness::Open : Openness::Closed;
    OracleSetup s = oracle_setup(file, over);
    if (tau >= 0) s.tau = tau;

    if (*value) {
      if (!s.game) throw OracleError("no differential game; set `game` in the oracle section");
      if (!s.payoff) throw OracleError("no payoff: the postcondition is neither open nor closed; pass --relax");
      if (s.isaacs.grid.axes.empty()) throw OracleError("no grid box; pass --box or set `box`");
      Flavor fl{flavor == "upper" ? ValueKind::Upper : ValueKind::Lower, !plain};
      ValueGrid vg = solve_isaacs(s.game, s.payoff, s.isaacs, fl);
      std::cout << "game: " << print(s.game) << "\n"
                << "payoff: " << print(s.payoff) << (s.openness == Openness::Open ? " > 0" : " >= 0") << "\n"
                << "flavor: " << to_string(fl) << ", nodes: " << vg.grid.size() << ", steps: " << vg.steps
                << ", out-of-domain foot points: " << vg.out_of_domain << "\n";
      RatEnv pt = at.empty() ? s.start_env : parse_point(at, file.ctx);
      if (!pt.empty()) {
        std::vector<Var> axes;
        for (const GridAxis& a : vg.grid.axes) axes.push_back(a.var);
        std::vector<double> x = s.grid_point(pt);
        std::ostringstream v;
        v.precision(10);
        v << vg.initial(x);
        SignVerdict verdict = value_sign_verdict(vg, x, s.openness, s.tau);
        std::cout << "V(0, " << point_text(axes, x) << ") = " << v.str() << "\n"
                  << "verdict (" << (s.openness == Openness::Open ? "open" : "closed") << ", tau " << s.tau
                  << "): " << to_string(verdict) << "\n";
      }
      if (!out.empty()) {
        bool bin = out.size() > 4 && out.substr(out.size() - 4) == ".bin";
        std::ofstream f;
        std::ostream& o = open_out(out, f, bin);
        if (bin) write_value_binary(vg, o);
        else write_value_csv(vg, o);
      }
      return 0;
    }

    if (*region) {
      if (!s.modal_game) throw OracleError("the goal has no modality");
      if (s.isaacs.grid.axes.empty()) throw OracleError("no grid box; pass --box or set `box`");
      Player p = player.empty() ? s.modal_player : player == "demon" ? Player::Demon : Player::Angel;
      Formula target = s.modal_post;
      if (!relax.empty()) target = relax_formula(target, *over.relax);
      RegionConfig rc = s.region_config();
      GridSet X = grid_semantics(target, rc);
      GridSet W = winning_region(s.modal_game, X, p, rc);
      std::ofstream f;
      write_region_csv(rc.isaacs.grid, W, open_out(out, f));
      std::cerr << (p == Player::Demon ? "demon" : "angel") << " wins from "
                << std::count(W.begin(), W.end(), 1) << " of " << W.size() << " nodes\n";
      return 0;
    }

    if (*simulate) {
      if (!s.game) throw OracleError("no differential game; set `game` in the oracle section");
      RolloutConfig rc;
      rc.T = T > 0 ? T : s.rollout_T;
      rc.dt = dt > 0 ? dt : s.rollout_dt;
      rc.resolution_angel = s.isaacs.resolution_angel;
      rc.params = s.isaacs.params;
      rc.seed = seed ? seed : s.seed;
      std::vector<double> xi;
      if (!start.empty()) {
        RatEnv p = parse_point(start, file.ctx);
        for (const Var& v : s.game->states) {
          auto it = p.find(v);
          if (it == p.end()) throw OracleError("--start misses state " + to_string(v));
          xi.push_back(to_double(it->second));
        }
      } else if (s.start) {
        xi = *s.start;
      } else {
        throw OracleError("no initial state; pass --start or set `start`");
      }
      if (!s.monitor) throw OracleError("no monitor formula");
      RolloutReport rep = simulate_feedback(s.game, s.witness(witness), policy == "random" ? AngelPolicy::Random
                                                                                           : AngelPolicy::Adversarial,
                                            xi, s.monitor, rc);
      if (!plot.empty()) {
        std::ofstream f;
        write_trajectory_csv(rep.trajectory, open_out(plot, f));
      }
      std::ostringstream o;
      o.precision(10);
      if (rep.violated)
        o << "monitor violated at t = " << rep.violation_time << ", "
          << point_text(s.game->states, rep.violation_state) << "\n";
      else
        o << "no monitor violation over T = " << rc.T << " (" << rep.trajectory.times.size() - 1 << " steps)\n";
      std::cout << o.str();
      return rep.violated ? 4 : 0;
    }
  } catch (const DhgError& e) {
    std::cerr << path << ":" << e.line << ": " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return 0;
}
