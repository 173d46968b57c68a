#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hba/common.hpp"
#include "hba/history.hpp"

namespace hba {

// A type: a complete behaviour specification for one player. distribution()
// is a pure function of the history prefix H^t, so the same inputs always
// yield the same action probabilities (external randomisation). Any internal
// memory (phase counters, learned tables) is reconstructed from the prefix.
//
// Instances are immutable after construction and may be shared across
// concurrently running episodes.
class TypeStrategy {
 public:
  TypeStrategy(std::string id, PlayerId player, int num_actions)
      : id_(std::move(id)), player_(player), num_actions_(num_actions) {}
  virtual ~TypeStrategy() = default;

  const std::string& id() const { return id_; }
  PlayerId player() const { return player_; }
  int num_actions() const { return num_actions_; }

  // Action distribution after the first t steps of h (default: all of h).
  std::vector<double> distribution(const History& h, int t) const {
    return distribution_at(h, t);
  }
  std::vector<double> distribution(const History& h) const {
    return distribution_at(h, h.length());
  }

 protected:
  virtual std::vector<double> distribution_at(const History& h, int t) const = 0;

 private:
  std::string id_;
  PlayerId player_;
  int num_actions_;
};

using StrategyPtr = std::shared_ptr<const TypeStrategy>;

// Cycles through a fixed action sequence: plays seq[t mod |seq|].
class PeriodicStrategy : public TypeStrategy {
 public:
  PeriodicStrategy(std::string id, PlayerId player, int num_actions,
                   std::vector<ActionId> sequence)
      : TypeStrategy(std::move(id), player, num_actions),
        sequence_(std::move(sequence)) {
    detail::require(!sequence_.empty(), "PeriodicStrategy: empty sequence");
  }

  std::vector<double> distribution_at(const History&, int t) const override {
    std::vector<double> probs(num_actions(), 0.0);
    probs[sequence_[t % sequence_.size()]] = 1.0;
    return probs;
  }

  int period() const { return static_cast<int>(sequence_.size()); }

 private:
  std::vector<ActionId> sequence_;
};

// Plays a fixed finite sequence, then repeats the last action forever.
class DeterministicSequenceStrategy : public TypeStrategy {
 public:
  DeterministicSequenceStrategy(std::string id, PlayerId player, int num_actions,
                                std::vector<ActionId> sequence)
      : TypeStrategy(std::move(id), player, num_actions),
        sequence_(std::move(sequence)) {
    detail::require(!sequence_.empty(), "DeterministicSequenceStrategy: empty sequence");
  }

  std::vector<double> distribution_at(const History&, int t) const override {
    std::vector<double> probs(num_actions(), 0.0);
    std::size_t k = std::min<std::size_t>(t, sequence_.size() - 1);
    probs[sequence_[k]] = 1.0;
    return probs;
  }

 private:
  std::vector<ActionId> sequence_;
};

// State-conditioned distribution table: one row per state, with an optional
// default row for states not listed.
class TableStrategy : public TypeStrategy {
 public:
  TableStrategy(std::string id, PlayerId player, int num_actions,
                std::map<StateId, std::vector<double>> rows,
                std::vector<double> default_row = {})
      : TypeStrategy(std::move(id), player, num_actions),
        rows_(std::move(rows)),
        default_row_(std::move(default_row)) {
    for (const auto& [s, row] : rows_) {
      detail::require(static_cast<int>(row.size()) == this->num_actions() &&
                          is_distribution(row),
                      "TableStrategy '" + this->id() + "': bad row for state " +
                          std::to_string(s));
    }
    if (!default_row_.empty()) {
      detail::require(static_cast<int>(default_row_.size()) == this->num_actions() &&
                          is_distribution(default_row_),
                      "TableStrategy '" + this->id() + "': bad default row");
    }
  }

  std::vector<double> distribution_at(const History& h, int t) const override {
    auto it = rows_.find(h.state(t));
    if (it != rows_.end()) return it->second;
    detail::require(!default_row_.empty(),
                    "TableStrategy '" + id() + "': no row for state " +
                        std::to_string(h.state(t)));
    return default_row_;
  }

 private:
  std::map<StateId, std::vector<double>> rows_;
  std::vector<double> default_row_;
};

inline StrategyPtr make_uniform_strategy(std::string id, PlayerId player,
                                         int num_actions) {
  std::vector<double> row(num_actions, 1.0 / num_actions);
  return std::make_shared<TableStrategy>(std::move(id), player, num_actions,
                                         std::map<StateId, std::vector<double>>{},
                                         std::move(row));
}

}  // namespace hba
