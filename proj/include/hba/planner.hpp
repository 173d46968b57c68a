#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "hba/beliefs.hpp"
#include "hba/common.hpp"
#include "hba/episode.hpp"
#include "hba/game.hpp"
#include "hba/history.hpp"

namespace hba {

struct PlanConfig {
  double gamma = 1.0;
  int horizon = 1;  // recursion depth; leaf value 0 past it

  void validate() const {
    detail::require(gamma >= 0.0 && gamma <= 1.0, "PlanConfig: gamma out of [0,1]");
    detail::require(horizon >= 1, "PlanConfig: horizon must be >= 1");
  }
};

struct PlanResult {
  std::vector<double> values;    // expected payoff per controlled action
  std::vector<ActionId> argmax;  // maximiser set, ties at kArgmaxTol
  std::vector<double> policy;    // uniform over argmax, zero elsewhere

  double max_value() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  }
};

namespace planner_detail {

// Belief-mixed prediction of the other players' joint action after the
// hypothetical history hhat: sum over type profiles of weight times the
// product of per-player action probabilities. The weight table is the
// combined posterior and must be normalised: the recursion mixes it in
// again at every depth, so only the normalised table reproduces the
// expected-payoff definition.
inline std::vector<double> predicted_joint_others(
    const GameSpec& spec,
    const std::vector<std::vector<StrategyPtr>>& type_spaces,
    std::span<const double> weights, const History& hhat) {
  std::vector<PlayerId> others = spec.other_players();
  std::vector<int> type_sizes;
  std::vector<int> action_sizes;
  for (PlayerId j : others) {
    type_sizes.push_back(static_cast<int>(type_spaces[j].size()));
    action_sizes.push_back(spec.num_actions(j));
  }
  ProfileIndexer types_idx(type_sizes);
  ProfileIndexer actions_idx(action_sizes);

  // Action distributions once per (player, type).
  std::vector<std::vector<std::vector<double>>> dists(others.size());
  for (std::size_t slot = 0; slot < others.size(); ++slot) {
    PlayerId j = others[slot];
    dists[slot].resize(type_spaces[j].size());
    for (std::size_t k = 0; k < type_spaces[j].size(); ++k)
      dists[slot][k] = type_spaces[j][k]->distribution(hhat);
  }

  std::vector<double> pred(actions_idx.count(), 0.0);
  for (long long tk = 0; tk < types_idx.count(); ++tk) {
    if (weights[tk] <= 0.0) continue;
    std::vector<int> profile = types_idx.unflatten(tk);
    for (long long ak = 0; ak < actions_idx.count(); ++ak) {
      std::vector<int> acts = actions_idx.unflatten(ak);
      double p = weights[tk];
      for (std::size_t slot = 0; slot < others.size() && p > 0.0; ++slot)
        p *= dists[slot][profile[slot]][acts[slot]];
      pred[ak] += p;
    }
  }
  return pred;
}

}  // namespace planner_detail

// Expected payoffs for every controlled action at the current state of hhat,
// recursing through the Bellman line with budget remaining steps. The weight
// table over joint type profiles stays fixed for the whole call (it encodes
// the posterior at the real history); the hypothetical history hhat advances
// so the hypothesised types are evaluated on the futures being considered.
// Terminal states and exhausted budgets are worth 0.
inline PlanResult plan_actions(const GameSpec& spec,
                               const std::vector<std::vector<StrategyPtr>>& type_spaces,
                               std::span<const double> weights, History& hhat,
                               int budget, double gamma) {
  StateId s = hhat.current_state();
  int na = spec.num_actions(spec.controlled_player);
  PlanResult out;
  out.values.assign(na, 0.0);

  if (!spec.is_terminal(s) && budget > 0) {
    std::vector<PlayerId> others = spec.other_players();
    std::vector<int> action_sizes;
    for (PlayerId j : others) action_sizes.push_back(spec.num_actions(j));
    ProfileIndexer others_idx(action_sizes);
    std::vector<double> pred =
        planner_detail::predicted_joint_others(spec, type_spaces, weights, hhat);

    JointAction joint(spec.num_players);
    for (ActionId ai = 0; ai < na; ++ai) {
      double e = 0.0;
      for (long long ak = 0; ak < others_idx.count(); ++ak) {
        if (pred[ak] <= 0.0) continue;
        std::vector<int> acts = others_idx.unflatten(ak);
        joint[spec.controlled_player] = ai;
        for (std::size_t slot = 0; slot < others.size(); ++slot)
          joint[others[slot]] = acts[slot];

        // Q over successors: entry reward plus discounted continuation.
        double q = 0.0;
        for (const auto& [next, tp] : spec.transition.row(s, joint)) {
          if (tp <= 0.0) continue;
          double value = entry_reward(spec, s, next);
          if (budget > 1 && !spec.is_terminal(next)) {
            hhat.push(joint, next);
            value += gamma * plan_actions(spec, type_spaces, weights, hhat,
                                          budget - 1, gamma)
                                 .max_value();
            hhat.pop();
          }
          q += tp * value;
        }
        e += pred[ak] * q;
      }
      out.values[ai] = e;
    }
  }

  double best = out.max_value();
  for (ActionId ai = 0; ai < na; ++ai)
    if (out.values[ai] >= best - kArgmaxTol) out.argmax.push_back(ai);
  out.policy.assign(na, 0.0);
  for (ActionId ai : out.argmax)
    out.policy[ai] = 1.0 / static_cast<double>(out.argmax.size());
  return out;
}

// Expected payoff of one controlled action (the outer recursion line).
inline double expected_payoff(const GameSpec& spec,
                              const std::vector<std::vector<StrategyPtr>>& type_spaces,
                              std::span<const double> weights, History& hhat,
                              ActionId ai, int budget, double gamma) {
  return plan_actions(spec, type_spaces, weights, hhat, budget, gamma).values[ai];
}

// Q value of one joint action at the current state of hhat (the Bellman
// line): successor-weighted entry reward plus discounted best continuation.
inline double action_value(const GameSpec& spec,
                           const std::vector<std::vector<StrategyPtr>>& type_spaces,
                           std::span<const double> weights, History& hhat,
                           const JointAction& joint, int budget, double gamma) {
  StateId s = hhat.current_state();
  detail::require(!spec.is_terminal(s), "action_value: terminal state");
  double q = 0.0;
  for (const auto& [next, tp] : spec.transition.row(s, joint)) {
    if (tp <= 0.0) continue;
    double value = entry_reward(spec, s, next);
    if (budget > 1 && !spec.is_terminal(next)) {
      hhat.push(joint, next);
      value += gamma *
               plan_actions(spec, type_spaces, weights, hhat, budget - 1, gamma)
                   .max_value();
      hhat.pop();
    }
    q += tp * value;
  }
  return q;
}

// Draws an action uniformly from the maximiser set.
inline ActionId select_action(const PlanResult& plan, Rng& rng) {
  return plan.argmax[rng.uniform_int(static_cast<int>(plan.argmax.size()))];
}

// The full ad hoc coordination loop: maintain the posterior over user types,
// plan against it, act uniformly over the maximiser set.
class HbaController : public Controller {
 public:
  HbaController(const GameSpec& spec, LikelihoodKind kind, PlanConfig config)
      : spec_(&spec), beliefs_(spec, kind), config_(config) {
    config_.validate();
    for (PlayerId j : spec.other_players())
      detail::require(!spec.user_types[j].empty(), "HbaController: empty user types");
  }

  std::vector<double> policy(const History& h) override {
    beliefs_.update_to(h);
    std::vector<double> weights = beliefs_.combined();
    History scratch = h;
    last_plan_ = plan_actions(*spec_, spec_->user_types, weights, scratch,
                              config_.horizon, config_.gamma);
    return last_plan_.policy;
  }

  const BeliefState& beliefs() const { return beliefs_; }
  const PlanResult& last_plan() const { return last_plan_; }

 private:
  const GameSpec* spec_;
  BeliefState beliefs_;
  PlanConfig config_;
  PlanResult last_plan_;
};

// The ideal-process controller: plans against the latent type spaces with a
// point-mass weight table on the true profile. Requires a pure type
// distribution, where the profile is constant over the run.
class OracleController : public Controller {
 public:
  explicit OracleController(const GameSpec& spec, PlanConfig config)
      : spec_(&spec), config_(config) {
    config_.validate();
    detail::require(spec.type_distribution.is_pure(),
                    "OracleController: ideal process needs a pure type distribution");
    std::vector<int> profile = spec.type_distribution.pure_profile();
    ProfileIndexer idx = spec.latent_joint_indexer();
    weights_.assign(idx.count(), 0.0);
    weights_[idx.flatten(profile)] = 1.0;
  }

  std::vector<double> policy(const History& h) override {
    History scratch = h;
    last_plan_ = plan_actions(*spec_, spec_->latent_types, weights_, scratch,
                              config_.horizon, config_.gamma);
    return last_plan_.policy;
  }

  const PlanResult& last_plan() const { return last_plan_; }

 private:
  const GameSpec* spec_;
  PlanConfig config_;
  std::vector<double> weights_;
  PlanResult last_plan_;
};

}  // namespace hba
