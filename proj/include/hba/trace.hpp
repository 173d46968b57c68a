#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hba/beliefs.hpp"
#include "hba/common.hpp"
#include "hba/episode.hpp"
#include "hba/game.hpp"

namespace hba {

// One line of a posterior trace for the tracked player: the posterior after
// t observed steps, its L1 error against the true marginal type
// distribution, and the running overlap/stochasticity diagnostics.
struct TraceRow {
  int t = 0;
  std::vector<double> posterior;
  double error = 0.0;
  double ao = 0.0;
  double as = 0.0;
  bool degenerate = false;
};

struct TraceResult {
  LikelihoodKind kind = LikelihoodKind::sum;
  PlayerId tracked = 1;
  std::vector<std::string> type_ids;  // tracked player's user types
  std::vector<TraceRow> rows;         // rows 0..steps
  EpisodeLog log;
  BeliefState final_beliefs;

  TraceResult(const GameSpec& spec, LikelihoodKind k)
      : kind(k), final_beliefs(spec, k) {}
};

// Runs one episode while maintaining the posterior and the AO/AS
// accumulators for the tracked player. The error compares the tracked
// posterior against the true marginal of Delta, which is meaningful when
// the user type space mirrors the latent one (the inclusion setting the
// convergence results assume).
inline TraceResult run_posterior_trace(const GameSpec& spec, Controller& controller,
                                       LikelihoodKind kind, PlayerId tracked,
                                       int steps, Rng& rng) {
  detail::require(tracked != spec.controlled_player,
                  "run_posterior_trace: tracked player must not be controlled");
  TraceResult out(spec, kind);
  out.tracked = tracked;
  for (const StrategyPtr& ts : spec.user_types[tracked])
    out.type_ids.push_back(ts->id());

  std::vector<double> delta_marginal =
      spec.type_distribution.marginal(spec.other_slot(tracked));
  // The error is only defined when posterior and Delta range over the same
  // elements; ids must line up when sizes match.
  bool comparable = delta_marginal.size() == spec.user_types[tracked].size();

  BeliefState beliefs(spec, kind);
  OverlapStats stats(spec.user_types[tracked]);
  History h(spec.initial_state);

  auto emit = [&](int t) {
    TraceRow row;
    row.t = t;
    PlayerPosterior post = beliefs.posterior(tracked);
    row.posterior = post.probs;
    row.degenerate = post.degenerate;
    row.error = comparable ? posterior_error(row.posterior, delta_marginal) : 0.0;
    if (t >= 1) {
      row.ao = stats.average_overlap();
      row.as = stats.average_stochasticity();
    }
    out.rows.push_back(std::move(row));
  };

  out.log.initial_state = spec.initial_state;
  emit(0);
  for (int t = 0; t < steps; ++t) {
    StateId s = h.current_state();
    if (spec.is_terminal(s)) {
      out.log.reached_terminal = true;
      break;
    }
    EpisodeStep step;
    step.t = t;
    step.state = s;
    step.sampled_types = sample_joint_types(spec, spec.type_distribution, rng);
    step.action_dists.resize(spec.num_players);
    for (PlayerId p = 0; p < spec.num_players; ++p) {
      if (p == spec.controlled_player)
        step.action_dists[p] = controller.policy(h);
      else
        step.action_dists[p] =
            spec.latent_types[p][step.sampled_types[p]]->distribution(h);
    }
    step.action.resize(spec.num_players);
    for (PlayerId p = 0; p < spec.num_players; ++p)
      step.action[p] = rng.sample(step.action_dists[p]);
    StepResult res = step_game(spec, s, step.action, rng);
    step.next = res.next;
    step.reward = res.reward;
    h.push(step.action, step.next);
    out.log.steps.push_back(std::move(step));

    beliefs.update_to(h);
    stats.update_to(h);
    emit(t + 1);
  }
  if (!out.log.steps.empty() && spec.is_terminal(h.current_state()))
    out.log.reached_terminal = true;

  out.final_beliefs = std::move(beliefs);
  return out;
}

}  // namespace hba
