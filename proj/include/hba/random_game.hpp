#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hba/common.hpp"
#include "hba/game.hpp"
#include "hba/strategy.hpp"

namespace hba {

struct RandomSbgConfig {
  int num_states = 100;
  int num_actions = 10;  // per player
  int num_players = 2;
  int num_types = 3;  // per non-controlled player
  int branching = 3;  // successors per (state, joint action) row
  bool terminal_free = false;
  bool pure_type_distribution = false;  // else uniform over joint profiles
  std::uint64_t seed = 1;
};

// Seeded random stochastic Bayesian game. Transition rows put normalised
// positive weights on `branching` distinct successors; roughly one in ten
// states is terminal unless terminal_free is set (long posterior runs need
// an uninterrupted history). Latent types are strictly positive random
// table policies, the user type spaces coincide with the latent ones, and
// priors are uniform. Identical seeds give identical games.
inline GameSpec generate_random_sbg(const RandomSbgConfig& cfg) {
  detail::require(cfg.num_states >= 1 && cfg.num_actions >= 1 &&
                      cfg.num_players >= 2 && cfg.num_types >= 1 &&
                      cfg.branching >= 1,
                  "generate_random_sbg: dims must be >= 1");
  GameSpec spec;
  spec.num_players = cfg.num_players;
  spec.controlled_player = 0;

  for (int s = 0; s < cfg.num_states; ++s)
    spec.state_names.push_back("s" + std::to_string(s));
  spec.initial_state = 0;
  spec.terminal.assign(cfg.num_states, false);
  if (!cfg.terminal_free && cfg.num_states >= 2) {
    int num_terminal = std::max(1, cfg.num_states / 10);
    for (int k = 0; k < num_terminal; ++k)
      spec.terminal[cfg.num_states - 1 - k] = true;
  }

  spec.action_names.resize(cfg.num_players);
  for (PlayerId p = 0; p < cfg.num_players; ++p)
    for (int a = 0; a < cfg.num_actions; ++a)
      spec.action_names[p].push_back("a" + std::to_string(a));

  ProfileIndexer ja = spec.joint_action_indexer();
  spec.transition = TransitionTable(cfg.num_states, ja);
  Rng trng = Rng::substream(cfg.seed, 0x7a517a51ULL);
  for (StateId s = 0; s < cfg.num_states; ++s) {
    if (spec.terminal[s]) continue;
    for (long long k = 0; k < ja.count(); ++k) {
      // branching distinct successors with positive normalised weights
      std::vector<StateId> succ;
      int want = std::min(cfg.branching, cfg.num_states);
      while (static_cast<int>(succ.size()) < want) {
        StateId cand = trng.uniform_int(cfg.num_states);
        if (std::find(succ.begin(), succ.end(), cand) == succ.end())
          succ.push_back(cand);
      }
      std::sort(succ.begin(), succ.end());
      std::vector<double> w(succ.size());
      double sum = 0.0;
      for (double& x : w) {
        x = 0.1 + trng.uniform();
        sum += x;
      }
      TransitionRow row;
      for (std::size_t m = 0; m < succ.size(); ++m)
        row.emplace_back(succ[m], w[m] / sum);
      spec.transition.set_row(s, ja.unflatten(k), std::move(row));
    }
  }

  spec.latent_types.resize(cfg.num_players);
  spec.user_types.resize(cfg.num_players);
  spec.user_priors.resize(cfg.num_players);
  Rng yrng = Rng::substream(cfg.seed, 0x7b527b52ULL);
  for (PlayerId j : spec.other_players()) {
    for (int k = 0; k < cfg.num_types; ++k) {
      std::map<StateId, std::vector<double>> rows;
      for (StateId s = 0; s < cfg.num_states; ++s) {
        std::vector<double> row(cfg.num_actions);
        double sum = 0.0;
        for (double& x : row) {
          x = 0.1 + yrng.uniform();
          sum += x;
        }
        for (double& x : row) x /= sum;
        rows.emplace(s, std::move(row));
      }
      spec.latent_types[j].push_back(std::make_shared<TableStrategy>(
          "type" + std::to_string(j) + "_" + std::to_string(k), j,
          cfg.num_actions, std::move(rows)));
    }
    spec.user_types[j] = spec.latent_types[j];
    spec.user_priors[j].assign(cfg.num_types, 1.0 / cfg.num_types);
  }

  ProfileIndexer ti = spec.latent_joint_indexer();
  std::vector<double> delta(ti.count(), 0.0);
  if (cfg.pure_type_distribution) {
    Rng drng = Rng::substream(cfg.seed, 0x7c537c53ULL);
    std::vector<int> profile(ti.slots());
    for (int slot = 0; slot < ti.slots(); ++slot)
      profile[slot] = drng.uniform_int(ti.size(slot));
    delta[ti.flatten(profile)] = 1.0;
  } else {
    std::fill(delta.begin(), delta.end(), 1.0 / static_cast<double>(ti.count()));
  }
  spec.type_distribution = TypeDistribution(ti, std::move(delta));
  spec.positive_priors_declared = true;

  spec.validate();
  return spec;
}

}  // namespace hba
