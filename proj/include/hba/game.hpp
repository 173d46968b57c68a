#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hba/common.hpp"
#include "hba/history.hpp"
#include "hba/strategy.hpp"

namespace hba {

// Sparse successor row: (state, probability) pairs in state order.
using TransitionRow = std::vector<std::pair<StateId, double>>;

// Transition kernel T(s, a, .), keyed by state and flattened joint action.
class TransitionTable {
 public:
  TransitionTable() = default;
  TransitionTable(int num_states, ProfileIndexer joint_actions)
      : joint_(std::move(joint_actions)),
        rows_(static_cast<std::size_t>(num_states) * joint_.count()) {}

  const ProfileIndexer& joint_actions() const { return joint_; }

  void set_row(StateId s, const JointAction& a, TransitionRow row) {
    rows_[index(s, a)] = std::move(row);
  }

  const TransitionRow& row(StateId s, const JointAction& a) const {
    return rows_[index(s, a)];
  }

  const TransitionRow& row(StateId s, long long joint_index) const {
    return rows_[static_cast<std::size_t>(s) * joint_.count() + joint_index];
  }

 private:
  std::size_t index(StateId s, const JointAction& a) const {
    return static_cast<std::size_t>(s) * joint_.count() + joint_.flatten(a);
  }

  ProfileIndexer joint_;
  std::vector<TransitionRow> rows_;
};

// Joint distribution over the non-controlled players' type indices.
// Slot order is player order with the controlled player skipped.
class TypeDistribution {
 public:
  TypeDistribution() = default;
  TypeDistribution(ProfileIndexer indexer, std::vector<double> probs)
      : indexer_(std::move(indexer)), probs_(std::move(probs)) {
    detail::require(static_cast<long long>(probs_.size()) == indexer_.count(),
                    "TypeDistribution: size mismatch");
  }

  const ProfileIndexer& indexer() const { return indexer_; }
  const std::vector<double>& probs() const { return probs_; }
  double prob(long long flat) const { return probs_[flat]; }

  // True iff some joint profile carries all the mass.
  bool is_pure() const {
    for (double p : probs_)
      if (p > 1.0 - kProbTol) return true;
    return false;
  }

  // The support profile of a pure distribution.
  std::vector<int> pure_profile() const {
    for (std::size_t k = 0; k < probs_.size(); ++k)
      if (probs_[k] > 1.0 - kProbTol) return indexer_.unflatten(static_cast<long long>(k));
    detail::fail("TypeDistribution: not pure");
  }

  // Marginal over one slot (slot order, controlled player skipped).
  std::vector<double> marginal(int slot) const {
    std::vector<double> m(indexer_.size(slot), 0.0);
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      if (probs_[k] <= 0.0) continue;
      m[indexer_.unflatten(static_cast<long long>(k))[slot]] += probs_[k];
    }
    return m;
  }

  std::vector<int> sample(Rng& rng) const {
    return indexer_.unflatten(rng.sample(probs_));
  }

 private:
  ProfileIndexer indexer_;
  std::vector<double> probs_;
};

// A stochastic Bayesian game. The controlled player has a single known type
// (its policy is supplied at run time), so latent types, the type
// distribution, user-defined type spaces and priors all range over the other
// players only. Immutable after validate(); safe to share across episodes.
struct GameSpec {
  std::vector<std::string> state_names;
  StateId initial_state = 0;
  std::vector<bool> terminal;

  int num_players = 2;
  PlayerId controlled_player = 0;
  std::vector<std::vector<std::string>> action_names;  // per player

  TransitionTable transition;

  // Latent (true) type spaces for each non-controlled player; empty vectors
  // for the controlled player's slot.
  std::vector<std::vector<StrategyPtr>> latent_types;
  TypeDistribution type_distribution;

  // User-defined hypothesis spaces and priors, same slot convention.
  std::vector<std::vector<StrategyPtr>> user_types;
  std::vector<std::vector<double>> user_priors;
  // Optional joint prior over the user profile product space, for the
  // correlated posterior. Defaults to the product of user_priors.
  std::optional<std::vector<double>> joint_user_prior;

  bool positive_priors_declared = false;

  int num_states() const { return static_cast<int>(state_names.size()); }
  int num_actions(PlayerId p) const { return static_cast<int>(action_names[p].size()); }
  bool is_terminal(StateId s) const { return terminal[s]; }

  // Players other than the controlled one, in player order.
  std::vector<PlayerId> other_players() const {
    std::vector<PlayerId> out;
    for (PlayerId p = 0; p < num_players; ++p)
      if (p != controlled_player) out.push_back(p);
    return out;
  }

  // Slot index of player j in other-player order.
  int other_slot(PlayerId j) const {
    detail::require(j != controlled_player, "other_slot: controlled player");
    return j < controlled_player ? j : j - 1;
  }

  ProfileIndexer joint_action_indexer() const {
    std::vector<int> sizes(num_players);
    for (PlayerId p = 0; p < num_players; ++p) sizes[p] = num_actions(p);
    return ProfileIndexer(sizes);
  }

  // Indexer over the user-defined joint type space of the other players.
  ProfileIndexer user_joint_indexer() const {
    std::vector<int> sizes;
    for (PlayerId j : other_players())
      sizes.push_back(static_cast<int>(user_types[j].size()));
    return ProfileIndexer(sizes);
  }

  ProfileIndexer latent_joint_indexer() const {
    std::vector<int> sizes;
    for (PlayerId j : other_players())
      sizes.push_back(static_cast<int>(latent_types[j].size()));
    return ProfileIndexer(sizes);
  }

  // The product of per-player user priors, flattened. Used as the fallback
  // joint prior and as the t=0 combined posterior.
  std::vector<double> product_user_prior() const {
    ProfileIndexer idx = user_joint_indexer();
    std::vector<double> table(idx.count());
    for (long long k = 0; k < idx.count(); ++k) {
      std::vector<int> profile = idx.unflatten(k);
      double p = 1.0;
      int slot = 0;
      for (PlayerId j : other_players()) p *= user_priors[j][profile[slot++]];
      table[k] = p;
    }
    return table;
  }

  std::vector<double> effective_joint_prior() const {
    return joint_user_prior ? *joint_user_prior : product_user_prior();
  }

  void validate() const;
};

inline void GameSpec::validate() const {
  detail::require(num_players >= 2, "GameSpec: need at least 2 players");
  detail::require(!state_names.empty(), "GameSpec: no states");
  detail::require(terminal.size() == state_names.size(), "GameSpec: terminal size");
  detail::require(initial_state >= 0 && initial_state < num_states(),
                  "GameSpec: initial state out of range");
  detail::require(static_cast<int>(action_names.size()) == num_players,
                  "GameSpec: action sets per player");
  for (PlayerId p = 0; p < num_players; ++p)
    detail::require(num_actions(p) >= 1, "GameSpec: empty action set");

  // Every non-terminal (state, joint action) row must be a distribution.
  ProfileIndexer ja = joint_action_indexer();
  for (StateId s = 0; s < num_states(); ++s) {
    if (is_terminal(s)) continue;
    for (long long k = 0; k < ja.count(); ++k) {
      const TransitionRow& row = transition.row(s, k);
      double sum = 0.0;
      for (const auto& [next, p] : row) {
        detail::require(next >= 0 && next < num_states(),
                        "GameSpec: transition target out of range");
        detail::require(p >= 0.0, "GameSpec: negative transition probability");
        sum += p;
      }
      detail::require(std::abs(sum - 1.0) <= kProbTol,
                      "GameSpec: transition row for state " + state_names[s] +
                          " does not sum to 1");
    }
  }

  detail::require(static_cast<int>(latent_types.size()) == num_players,
                  "GameSpec: latent type slots");
  detail::require(static_cast<int>(user_types.size()) == num_players,
                  "GameSpec: user type slots");
  detail::require(static_cast<int>(user_priors.size()) == num_players,
                  "GameSpec: prior slots");
  for (PlayerId j : other_players()) {
    detail::require(!latent_types[j].empty(), "GameSpec: empty latent type space");
    detail::require(!user_types[j].empty(), "GameSpec: empty user type space");
    detail::require(user_priors[j].size() == user_types[j].size(),
                    "GameSpec: prior size mismatch");
    detail::require(is_distribution(user_priors[j]),
                    "GameSpec: prior for player " + std::to_string(j + 1) +
                        " does not sum to 1");
    if (positive_priors_declared) {
      for (double p : user_priors[j])
        detail::require(p > 0.0, "GameSpec: positive priors declared but zero found");
    }
    for (const StrategyPtr& ts : latent_types[j])
      detail::require(ts->num_actions() == num_actions(j), "GameSpec: latent type arity");
    for (const StrategyPtr& ts : user_types[j])
      detail::require(ts->num_actions() == num_actions(j), "GameSpec: user type arity");
  }

  const std::vector<double>& delta = type_distribution.probs();
  detail::require(static_cast<long long>(delta.size()) ==
                      latent_joint_indexer().count(),
                  "GameSpec: type distribution size");
  double dsum = 0.0;
  for (double p : delta) {
    detail::require(p >= 0.0, "GameSpec: negative type probability");
    dsum += p;
  }
  detail::require(std::abs(dsum - 1.0) <= kProbTol,
                  "GameSpec: type distribution does not sum to 1");

  if (joint_user_prior) {
    detail::require(static_cast<long long>(joint_user_prior->size()) ==
                        user_joint_indexer().count(),
                    "GameSpec: joint prior size");
    detail::require(is_distribution(*joint_user_prior),
                    "GameSpec: joint prior does not sum to 1");
  }
}

// Samples a joint type profile from Delta. Returns one entry per player in
// player order; the controlled player's slot is -1 (its single type is fixed
// and known). Profiles are resampled every step, which is what lets mixed
// distributions model randomly changing types.
inline std::vector<int> sample_joint_types(const GameSpec& spec,
                                           const TypeDistribution& delta,
                                           Rng& rng) {
  std::vector<int> slots = delta.sample(rng);
  std::vector<int> profile(spec.num_players, -1);
  int slot = 0;
  for (PlayerId j : spec.other_players()) profile[j] = slots[slot++];
  return profile;
}

// Reward on entering a terminal state: r(s, a, s') = 1 iff s' is terminal
// and s is not. With gamma = 1 this makes expected payoffs equal bounded
// reach probabilities.
inline double entry_reward(const GameSpec& spec, StateId s, StateId next) {
  return (!spec.is_terminal(s) && spec.is_terminal(next)) ? 1.0 : 0.0;
}

struct StepResult {
  StateId next;
  double reward;
};

// Draws the successor state for one joint action. Stepping from a terminal
// state is rejected: the run semantics stop there.
inline StepResult step_game(const GameSpec& spec, StateId s, const JointAction& a,
                            Rng& rng) {
  detail::require(!spec.is_terminal(s), "step_game: state is terminal");
  const TransitionRow& row = spec.transition.row(s, a);
  double u = rng.uniform();
  double acc = 0.0;
  StateId next = row.back().first;
  for (const auto& [target, p] : row) {
    acc += p;
    if (u < acc) {
      next = target;
      break;
    }
  }
  return {next, entry_reward(spec, s, next)};
}

inline StepResult step_game(const GameSpec& spec, const History& h,
                            const JointAction& a, Rng& rng) {
  return step_game(spec, h.current_state(), a, rng);
}

}  // namespace hba
