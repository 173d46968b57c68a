#pragma once

#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hba/beliefs.hpp"
#include "hba/chain.hpp"
#include "hba/common.hpp"
#include "hba/game.hpp"
#include "hba/history.hpp"
#include "hba/planner.hpp"

namespace hba {

// Maps histories onto a finite key set so the induced process becomes a
// finite Markov chain: (current state, t mod period). Terminal states
// collapse to one node per state. The period covers whatever phase structure
// the strategies and the controller's maximiser sets depend on; the builder
// validates the map instead of trusting it.
struct QuotientMap {
  int period = 1;

  long long key(const GameSpec& spec, const History& h) const {
    StateId s = h.current_state();
    if (spec.is_terminal(s)) return static_cast<long long>(s) * period;
    return static_cast<long long>(s) * period + (h.length() % period);
  }

  std::string node_name(const GameSpec& spec, const History& h) const {
    StateId s = h.current_state();
    if (spec.is_terminal(s)) return spec.state_names[s];
    return spec.state_names[s] + "@" + std::to_string(h.length() % period);
  }
};

enum class ProcessKind { ideal_x, user_y };

struct ChainBuildOptions {
  ProcessKind process = ProcessKind::user_y;
  LikelihoodKind posterior = LikelihoodKind::product;  // Y only
  PlanConfig plan;
  QuotientMap quotient;
};

// Raised when two histories fall into the same quotient class but do not
// behave identically there. Carries the counterexample pair.
class QuotientConsistencyError : public std::runtime_error {
 public:
  QuotientConsistencyError(std::string what, std::string repr_history,
                           std::string new_history)
      : std::runtime_error(what + "\n  representative: " + repr_history +
                           "\n  counterexample: " + new_history),
        representative(std::move(repr_history)),
        counterexample(std::move(new_history)) {}

  std::string representative;
  std::string counterexample;
};

namespace builder_detail {

inline std::string format_history(const GameSpec& spec, const History& h) {
  std::ostringstream os;
  os << spec.state_names[h.state(0)];
  for (int tau = 0; tau < h.length(); ++tau) {
    os << " -(";
    const JointAction& a = h.action(tau);
    for (PlayerId p = 0; p < spec.num_players; ++p) {
      if (p) os << ",";
      os << spec.action_names[p][a[p]];
    }
    os << ")-> " << spec.state_names[h.state(tau + 1)];
  }
  return os.str();
}

// Everything about a history the quotient must preserve: the action
// distributions of all latent and user types (they drive the dynamics and
// the posterior) and both maximiser sets (they drive the controller).
struct NodeBehaviour {
  std::vector<std::vector<std::vector<double>>> latent_dists;  // [player][type]
  std::vector<std::vector<std::vector<double>>> user_dists;
  std::vector<ActionId> argmax_self;
  std::vector<ActionId> argmax_oracle;
  PlanResult plan_self;
  PlanResult plan_oracle;
  bool has_oracle = false;
};

}  // namespace builder_detail

// Builds the finite chain induced by a controller in the game, under the
// quotient map. Expansion enumerates every controlled action so that
// success-rate queries are action-resolved; the chain's own edges mix only
// over the controller's maximiser set. Each revisit of a known class is
// validated against the class representative; a mismatch raises
// QuotientConsistencyError with the offending history pair.
//
// The ideal process plans with a point-mass on the true profile and is only
// defined for pure type distributions. User-process oracle annotations
// (needed by criticality and premise checks) are attached when the
// distribution is pure.
inline ProcessChain build_chain(const GameSpec& spec, const ChainBuildOptions& opt) {
  opt.plan.validate();
  detail::require(opt.quotient.period >= 1, "build_chain: period must be >= 1");
  const bool pure = spec.type_distribution.is_pure();
  if (opt.process == ProcessKind::ideal_x)
    detail::require(pure, "build_chain: ideal process requires a pure type distribution");

  // Point-mass weight table over latent profiles, for oracle planning.
  std::vector<double> oracle_weights;
  if (pure) {
    ProfileIndexer idx = spec.latent_joint_indexer();
    oracle_weights.assign(idx.count(), 0.0);
    oracle_weights[idx.flatten(spec.type_distribution.pure_profile())] = 1.0;
  }

  int na = spec.num_actions(spec.controlled_player);
  std::vector<PlayerId> others = spec.other_players();

  auto behaviour_at = [&](const History& h) {
    builder_detail::NodeBehaviour b;
    b.latent_dists.resize(spec.num_players);
    b.user_dists.resize(spec.num_players);
    for (PlayerId j : others) {
      for (const StrategyPtr& ts : spec.latent_types[j])
        b.latent_dists[j].push_back(ts->distribution(h));
      for (const StrategyPtr& ts : spec.user_types[j])
        b.user_dists[j].push_back(ts->distribution(h));
    }
    if (spec.is_terminal(h.current_state())) return b;

    History scratch = h;
    if (opt.process == ProcessKind::user_y) {
      BeliefState beliefs(spec, opt.posterior);
      beliefs.update_to(h);
      std::vector<double> weights = beliefs.combined();
      b.plan_self = plan_actions(spec, spec.user_types, weights, scratch,
                                 opt.plan.horizon, opt.plan.gamma);
    } else {
      b.plan_self = plan_actions(spec, spec.latent_types, oracle_weights, scratch,
                                 opt.plan.horizon, opt.plan.gamma);
    }
    b.argmax_self = b.plan_self.argmax;
    if (pure) {
      b.has_oracle = true;
      if (opt.process == ProcessKind::ideal_x) {
        b.plan_oracle = b.plan_self;
      } else {
        b.plan_oracle = plan_actions(spec, spec.latent_types, oracle_weights,
                                     scratch, opt.plan.horizon, opt.plan.gamma);
      }
      b.argmax_oracle = b.plan_oracle.argmax;
    }
    return b;
  };

  ProcessChain chain(opt.process == ProcessKind::ideal_x ? "X" : "Y");
  std::map<long long, int> key_to_node;
  std::vector<History> reprs;
  std::vector<builder_detail::NodeBehaviour> behaviours;
  std::deque<int> pending;

  auto dists_close = [](const std::vector<std::vector<std::vector<double>>>& a,
                        const std::vector<std::vector<std::vector<double>>>& b) {
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t k = 0; k < a[j].size(); ++k)
        for (std::size_t m = 0; m < a[j][k].size(); ++m)
          if (std::abs(a[j][k][m] - b[j][k][m]) > kChainTol) return false;
    return true;
  };

  auto visit = [&](const History& h) {
    long long key = opt.quotient.key(spec, h);
    auto it = key_to_node.find(key);
    if (it != key_to_node.end()) {
      int k = it->second;
      // Terminal classes are absorbing; no behaviour left to validate.
      if (chain.node(k).term) return k;
      // Validate: histories in one class must yield identical behaviour.
      builder_detail::NodeBehaviour b = behaviour_at(h);
      const builder_detail::NodeBehaviour& ref = behaviours[k];
      if (!dists_close(b.latent_dists, ref.latent_dists) ||
          !dists_close(b.user_dists, ref.user_dists))
        throw QuotientConsistencyError(
            "quotient class '" + chain.node(k).name +
                "': type action distributions differ between histories",
            builder_detail::format_history(spec, reprs[k]),
            builder_detail::format_history(spec, h));
      if (b.argmax_self != ref.argmax_self)
        throw QuotientConsistencyError(
            "quotient class '" + chain.node(k).name +
                "': controller maximiser set differs between histories "
                "(belief evolution is not captured by the quotient)",
            builder_detail::format_history(spec, reprs[k]),
            builder_detail::format_history(spec, h));
      if (b.has_oracle && ref.has_oracle && b.argmax_oracle != ref.argmax_oracle)
        throw QuotientConsistencyError(
            "quotient class '" + chain.node(k).name +
                "': oracle maximiser set differs between histories",
            builder_detail::format_history(spec, reprs[k]),
            builder_detail::format_history(spec, h));
      return k;
    }

    ChainNode node;
    node.name = opt.quotient.node_name(spec, h);
    node.game_state = h.current_state();
    node.term = spec.is_terminal(node.game_state);
    builder_detail::NodeBehaviour b = behaviour_at(h);
    if (!node.term) {
      node.e_self = b.plan_self.values;
      node.argmax_self = b.plan_self.argmax;
      if (b.has_oracle) {
        node.e_oracle = b.plan_oracle.values;
        node.argmax_oracle = b.plan_oracle.argmax;
      }
    }
    int k = chain.add_node(std::move(node));
    reprs.push_back(h);
    behaviours.push_back(std::move(b));
    key_to_node.emplace(key, k);
    pending.push_back(k);
    return k;
  };

  History root(spec.initial_state);
  int root_node = visit(root);
  chain.set_initial(root_node);

  std::vector<int> other_action_sizes;
  for (PlayerId j : others) other_action_sizes.push_back(spec.num_actions(j));
  ProfileIndexer others_idx(other_action_sizes);

  while (!pending.empty()) {
    int k = pending.front();
    pending.pop_front();
    if (chain.node(k).term) {
      chain.add_edge(k, k, 1.0);
      continue;
    }
    History h = reprs[k];
    StateId s = h.current_state();

    // True joint behaviour of the other players at this class.
    std::vector<double> pred = planner_detail::predicted_joint_others(
        spec, spec.latent_types, spec.type_distribution.probs(), h);

    std::vector<std::vector<std::pair<StateId, double>>> succ_states(na);
    std::vector<std::vector<std::pair<int, double>>> succ_nodes(na);
    std::map<std::pair<int, StateId>, double> state_acc;
    std::map<std::pair<int, int>, double> node_acc;

    JointAction joint(spec.num_players);
    for (ActionId ai = 0; ai < na; ++ai) {
      for (long long ak = 0; ak < others_idx.count(); ++ak) {
        if (pred[ak] <= 0.0) continue;
        std::vector<int> acts = others_idx.unflatten(ak);
        joint[spec.controlled_player] = ai;
        for (std::size_t slot = 0; slot < others.size(); ++slot)
          joint[others[slot]] = acts[slot];
        for (const auto& [next, tp] : spec.transition.row(s, joint)) {
          if (tp <= 0.0) continue;
          double p = pred[ak] * tp;
          h.push(joint, next);
          int target = visit(h);
          h.pop();
          state_acc[{ai, next}] += p;
          node_acc[{ai, target}] += p;
        }
      }
    }
    for (const auto& [key, p] : state_acc)
      succ_states[key.first].emplace_back(key.second, p);
    for (const auto& [key, p] : node_acc)
      succ_nodes[key.first].emplace_back(key.second, p);

    // Chain law: uniform mixture over the maximiser set.
    const std::vector<ActionId>& am = chain.node(k).argmax_self;
    double w = 1.0 / static_cast<double>(am.size());
    for (ActionId ai : am)
      for (const auto& [dst, p] : succ_nodes[ai]) chain.add_edge(k, dst, w * p);

    chain.node(k).succ_states_by_action = std::move(succ_states);
    chain.node(k).succ_nodes_by_action = std::move(succ_nodes);
  }

  chain.validate();
  return chain;
}

}  // namespace hba
