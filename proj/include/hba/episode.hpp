#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hba/common.hpp"
#include "hba/game.hpp"
#include "hba/history.hpp"

namespace hba {

// Policy for the controlled player. policy() may update internal state
// (belief accumulators); each controller instance belongs to one run.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::vector<double> policy(const History& h) = 0;
};

class UniformController : public Controller {
 public:
  explicit UniformController(int num_actions) : num_actions_(num_actions) {}
  std::vector<double> policy(const History&) override {
    return std::vector<double>(num_actions_, 1.0 / num_actions_);
  }

 private:
  int num_actions_;
};

struct EpisodeStep {
  int t = 0;
  StateId state = 0;
  std::vector<int> sampled_types;  // player order, -1 for the controlled slot
  JointAction action;
  StateId next = 0;
  double reward = 0.0;
  // Distribution each player acted from: the controller's for the controlled
  // player, the sampled type's for everyone else. Enough to replay the run.
  std::vector<std::vector<double>> action_dists;
};

struct EpisodeLog {
  StateId initial_state = 0;
  std::vector<EpisodeStep> steps;
  bool reached_terminal = false;

  History history() const {
    History h(initial_state);
    for (const EpisodeStep& st : steps) h.push(st.action, st.next);
    return h;
  }
};

// Runs one episode per the SBG run semantics: sample types, let every player
// act, draw the successor, stop at a terminal state or after max_steps.
// With a fixed seed the log is a pure function of (spec, controller,
// max_steps, seed). RNG order per step: type profile, then actions in player
// order, then the successor state. The observer, if any, sees each step
// right after it is logged (used for plan tracing).
inline EpisodeLog run_episode(
    const GameSpec& spec, Controller& controller, int max_steps, Rng& rng,
    const std::function<void(const EpisodeStep&)>& observer = {}) {
  EpisodeLog log;
  log.initial_state = spec.initial_state;
  History h(spec.initial_state);

  for (int t = 0; t < max_steps; ++t) {
    StateId s = h.current_state();
    if (spec.is_terminal(s)) {
      log.reached_terminal = true;
      break;
    }

    EpisodeStep step;
    step.t = t;
    step.state = s;
    step.sampled_types = sample_joint_types(spec, spec.type_distribution, rng);

    step.action_dists.resize(spec.num_players);
    for (PlayerId p = 0; p < spec.num_players; ++p) {
      if (p == spec.controlled_player) {
        step.action_dists[p] = controller.policy(h);
      } else {
        step.action_dists[p] =
            spec.latent_types[p][step.sampled_types[p]]->distribution(h);
      }
    }

    step.action.resize(spec.num_players);
    for (PlayerId p = 0; p < spec.num_players; ++p)
      step.action[p] = rng.sample(step.action_dists[p]);

    StepResult res = step_game(spec, s, step.action, rng);
    step.next = res.next;
    step.reward = res.reward;

    h.push(step.action, step.next);
    log.steps.push_back(std::move(step));
    if (observer) observer(log.steps.back());
  }

  if (!log.steps.empty() && spec.is_terminal(h.current_state()))
    log.reached_terminal = true;
  if (log.steps.empty() && spec.is_terminal(spec.initial_state))
    log.reached_terminal = true;
  return log;
}

}  // namespace hba
