#pragma once

#include <vector>

#include "hba/common.hpp"

namespace hba {

// An alternating sequence <s0, a0, s1, a1, ..., st> of states and joint
// actions. length() is t, the number of completed steps. The planner pushes
// and pops hypothetical steps on a scratch copy during recursion.
class History {
 public:
  explicit History(StateId initial) : states_{initial} {}

  int length() const { return static_cast<int>(actions_.size()); }

  StateId state(int tau) const { return states_[tau]; }
  const JointAction& action(int tau) const { return actions_[tau]; }
  StateId current_state() const { return states_.back(); }
  StateId initial_state() const { return states_.front(); }

  void push(JointAction a, StateId next) {
    actions_.push_back(std::move(a));
    states_.push_back(next);
  }

  void pop() {
    actions_.pop_back();
    states_.pop_back();
  }

  bool operator==(const History& other) const = default;

 private:
  std::vector<StateId> states_;
  std::vector<JointAction> actions_;
};

}  // namespace hba
