#pragma once

#include <string>
#include <vector>

#include "hba/common.hpp"
#include "hba/episode.hpp"
#include "hba/game.hpp"
#include "hba/random_game.hpp"
#include "hba/rl_type.hpp"
#include "hba/trace.hpp"

namespace hba {

// The long-run posterior experiment: a random two-player game where the
// other player draws one of several epsilon-greedy learning types each step,
// with exploration annealed to zero mid-run, and the sum posterior tracked
// against the type distribution.
struct Figure1Params {
  int num_states = 100;
  int num_actions = 10;
  int num_types = 3;
  int branching = 3;
  int steps = 3000;
  double epsilon0 = 0.7;
  int anneal_start = 1000;
  int anneal_end = 2000;
  double learning_rate = 0.6;
  std::vector<double> delta = {0.3, 0.45, 0.25};  // marginal over the types
  LikelihoodKind posterior = LikelihoodKind::sum;
};

// Assembles the game: terminal-free random dynamics so the trace is one
// uninterrupted history, learner types with distinct preferred actions (so
// the average overlap eventually vanishes once exploration stops), user
// types equal to the latent ones, uniform priors.
inline GameSpec build_figure1_game(const Figure1Params& params, std::uint64_t seed) {
  detail::require(static_cast<int>(params.delta.size()) == params.num_types,
                  "figure1: delta size must match the number of types");
  detail::require(is_distribution(params.delta, 1e-9),
                  "figure1: delta must sum to 1");
  detail::require(params.num_types <= params.num_actions,
                  "figure1: need at least as many actions as types");

  RandomSbgConfig cfg;
  cfg.num_states = params.num_states;
  cfg.num_actions = params.num_actions;
  cfg.num_players = 2;
  cfg.num_types = params.num_types;
  cfg.branching = params.branching;
  cfg.terminal_free = true;
  cfg.seed = seed;
  GameSpec spec = generate_random_sbg(cfg);

  // Replace the table types with learners whose preferred actions are
  // pairwise distinct: bump seeds deterministically until they are.
  PlayerId j = 1;
  spec.latent_types[j].clear();
  std::vector<ActionId> used;
  std::uint64_t payoff_seed = detail::splitmix64(seed ^ 0xf160f160ULL);
  for (int k = 0; k < params.num_types; ++k) {
    RlTypeConfig rl;
    rl.learning_rate = params.learning_rate;
    rl.epsilon0 = params.epsilon0;
    rl.anneal_start = params.anneal_start;
    rl.anneal_end = params.anneal_end;
    std::shared_ptr<const RlTypeStrategy> type;
    while (true) {
      rl.payoff_seed = payoff_seed++;
      type = make_rl_type("rl" + std::to_string(k), j, params.num_actions, rl);
      ActionId pref = type->preferred_action();
      if (std::find(used.begin(), used.end(), pref) == used.end()) {
        used.push_back(pref);
        break;
      }
    }
    spec.latent_types[j].push_back(type);
  }
  spec.user_types[j] = spec.latent_types[j];
  spec.user_priors[j].assign(params.num_types, 1.0 / params.num_types);

  ProfileIndexer ti = spec.latent_joint_indexer();
  spec.type_distribution = TypeDistribution(ti, params.delta);
  spec.validate();
  return spec;
}

// Runs the experiment with a uniform-random controlled player; the posterior
// over the other player's types is what the trace follows.
inline TraceResult run_figure1(const Figure1Params& params, std::uint64_t seed) {
  GameSpec spec = build_figure1_game(params, seed);
  UniformController controller(spec.num_actions(spec.controlled_player));
  Rng rng = Rng::substream(seed, 0xf161f161ULL);
  return run_posterior_trace(spec, controller, params.posterior, 1, params.steps,
                             rng);
}

}  // namespace hba
