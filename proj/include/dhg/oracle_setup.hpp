#pragma once
// Oracle runs configured from the `oracle:` section of a `.dhg` file.
//
//   oracle:
//     box = x in [-3,3]              # grid axes, region syntax
//     dx = 1/20                      # grid spacing (exact)
//     dt = 0.01
//     T = 1
//     resolution = 4                 # or resolution_demon / resolution_angel
//     params = L=1/2, v=(17/32,0)    # constants for the numerical runs
//     game = {x' = ...}              # differential game (default: the goal's)
//     post = Hp                      # its postcondition (default: the goal's)
//     payoff = x^3 - 1               # default: arithmetization of post
//     witness = y := 1               # Demon feedback; witness.NAME for named ones
//     wrong_witness = y := -1        # mutation fixture, also named "wrong"
//     monitor = 1 <= x^3             # default: post
//     start = x=1.1
//     check = x in [1,2]             # boxes for value and rollout checks (repeatable;
//                                    # default: the regions section)
//     rollout_T = 10
//     rollout_dt = 0.01
//     tau = 0

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhg/dhgfile.hpp"
#include "dhg/oracle.hpp"

namespace dhg {

struct OracleOverrides {
  std::optional<double> T, dt;
  std::optional<Rational> dx;
  std::optional<std::string> box;
  std::optional<int> resolution;
  std::optional<Openness> relax;  // payoff from the interior or closure of post
  int threads = 1;
};

struct OracleSetup {
  // The goal's outermost modality (any hybrid game), if there is one.
  Game modal_game;
  Formula modal_post;
  Player modal_player = Player::Demon;

  // The differential game used for values and rollouts.
  Game game;
  Formula post;
  Player player = Player::Demon;  // who wants post: Demon for [g], Angel for <g>
  Term payoff;                    // Demon maximizes it; sign encodes Demon's goal
  Openness openness = Openness::Closed;

  IsaacsConfig isaacs;
  std::map<std::string, std::vector<std::pair<Var, Term>>> witnesses;
  Formula monitor;
  std::optional<std::vector<double>> start;  // over game->states
  RatEnv start_env;
  std::vector<RationalBox> checks;
  double rollout_T = 1, rollout_dt = 0.01;
  std::uint64_t seed = 1;
  double tau = 0;

  RegionConfig region_config() const { return {isaacs, tau}; }
  // A point in grid-axis order from named values (missing axes throw).
  std::vector<double> grid_point(const RatEnv& values) const;
  // Witness by name: "default", "wrong" or a witness.NAME key.
  const std::vector<std::pair<Var, Term>>& witness(const std::string& name) const;
};

// Throws DhgError (line 0) on missing or malformed keys.
OracleSetup oracle_setup(const DhgFile& file, const OracleOverrides& over = {});

// `x=1.5, l=(2,0)`: scalar or vector items with exact values.
RatEnv parse_point(const std::string& text, const ParseContext& ctx);

// The [g]F or <g>F under implications, conjunctions and quantifiers; with
// `diffgame_only` it skips modalities over other games.
Formula find_modality(const Formula& f, bool diffgame_only);

}  // namespace dhg
