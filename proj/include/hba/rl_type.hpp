#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "hba/common.hpp"
#include "hba/history.hpp"
#include "hba/strategy.hpp"

namespace hba {

// Epsilon-greedy tabular value learner used as a type. The exposed
// distribution is the external mixture: the greedy action gets
// 1 - eps + eps/|A|, every other action gets eps/|A|.
struct RlTypeConfig {
  std::uint64_t payoff_seed = 0;
  double learning_rate = 0.6;
  double epsilon0 = 0.7;
  int anneal_start = 1000;  // eps stays at epsilon0 before this step
  int anneal_end = 2000;    // eps reaches 0 here and stays there

  void validate() const {
    detail::require(learning_rate > 0.0 && learning_rate <= 1.0,
                    "RlTypeConfig: learning rate out of (0,1]");
    detail::require(epsilon0 >= 0.0 && epsilon0 <= 1.0,
                    "RlTypeConfig: epsilon0 out of [0,1]");
    detail::require(anneal_start >= 0 && anneal_end >= anneal_start,
                    "RlTypeConfig: bad anneal window");
  }

  double epsilon(int t) const {
    if (t < anneal_start) return epsilon0;
    if (t >= anneal_end) return 0.0;
    return epsilon0 * static_cast<double>(anneal_end - t) /
           static_cast<double>(anneal_end - anneal_start);
  }
};

// The type learns action values off-policy from the owning player's observed
// actions against a private seeded payoff table, then mixes epsilon-greedily
// over the learned values. One action pays 1, the rest pay seeded noise
// below 0.15, so differently seeded types settle on distinct greedy actions
// almost immediately and the average overlap between them dies once
// exploration stops.
class RlTypeStrategy : public TypeStrategy {
 public:
  RlTypeStrategy(std::string id, PlayerId player, int num_actions,
                 RlTypeConfig config)
      : TypeStrategy(std::move(id), player, num_actions), config_(config) {
    config_.validate();
    preferred_ = static_cast<ActionId>(
        detail::splitmix64(config_.payoff_seed ^ 0x9d2c5680ULL) % num_actions);
  }

  const RlTypeConfig& config() const { return config_; }
  ActionId preferred_action() const { return preferred_; }

  double payoff(ActionId a) const {
    if (a == preferred_) return 1.0;
    std::uint64_t key = detail::splitmix64(
        config_.payoff_seed ^ detail::splitmix64(static_cast<std::uint64_t>(a) + 1));
    return 0.15 * (static_cast<double>(key >> 11) * 0x1.0p-53);
  }

  // Greedy action after learning from the first t steps of h. Ties break to
  // the lowest action id.
  ActionId greedy_action(const History& h, int t) const {
    std::vector<double> q = learned_values(h, t);
    return static_cast<ActionId>(std::max_element(q.begin(), q.end()) - q.begin());
  }

  std::vector<double> distribution_at(const History& h, int t) const override {
    ActionId greedy = greedy_action(h, t);
    double eps = config_.epsilon(t);
    std::vector<double> probs(num_actions(), eps / num_actions());
    probs[greedy] += 1.0 - eps;
    return probs;
  }

 private:
  // Replays the history, nudging Q toward the private payoff on each
  // observed own action.
  std::vector<double> learned_values(const History& h, int t) const {
    std::vector<double> q(num_actions(), 0.0);
    for (int tau = 0; tau < t; ++tau) {
      ActionId a = h.action(tau)[player()];
      q[a] += config_.learning_rate * (payoff(a) - q[a]);
    }
    return q;
  }

  RlTypeConfig config_;
  ActionId preferred_;
};

inline std::shared_ptr<const RlTypeStrategy> make_rl_type(std::string id,
                                                          PlayerId player,
                                                          int num_actions,
                                                          RlTypeConfig config) {
  return std::make_shared<RlTypeStrategy>(std::move(id), player, num_actions,
                                          config);
}

}  // namespace hba
