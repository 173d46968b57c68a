#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hba/beliefs.hpp"
#include "hba/chain_builder.hpp"
#include "hba/common.hpp"
#include "hba/critical.hpp"
#include "hba/csv.hpp"
#include "hba/episode.hpp"
#include "hba/game.hpp"
#include "hba/planner.hpp"
#include "hba/rl_type.hpp"
#include "hba/scenario.hpp"
#include "hba/strategy.hpp"
#include "hba/trace.hpp"

namespace hba {

// ---------------------------------------------------------------------------
// Canonical fixtures. ex2/ex3/ex4 are repeated single-state games probing
// the three posteriors; ex5/ex6 are the two-action matching task with
// inaccurate hypothesis types.
// ---------------------------------------------------------------------------

namespace fixtures {

// Single non-terminal state, every joint action loops back. Used by the
// posterior-convergence examples, where only the observed actions matter.
inline GameSpec repeated_game(int num_players) {
  GameSpec spec;
  spec.state_names = {"s"};
  spec.initial_state = 0;
  spec.terminal = {false};
  spec.num_players = num_players;
  spec.controlled_player = 0;
  spec.action_names.assign(num_players, {"A", "B"});
  ProfileIndexer ja = spec.joint_action_indexer();
  spec.transition = TransitionTable(1, ja);
  for (long long k = 0; k < ja.count(); ++k)
    spec.transition.set_row(0, ja.unflatten(k), {{0, 1.0}});
  spec.latent_types.resize(num_players);
  spec.user_types.resize(num_players);
  spec.user_priors.resize(num_players);
  return spec;
}

inline StrategyPtr always(const std::string& id, PlayerId j, ActionId a,
                          int num_actions = 2) {
  return std::make_shared<PeriodicStrategy>(id, j, num_actions,
                                            std::vector<ActionId>{a});
}

// Two fixed types assigned half-half: the mixed distribution that breaks
// the product posterior once both actions have been observed.
inline GameSpec example2_game() {
  GameSpec spec = repeated_game(2);
  spec.latent_types[1] = {always("theta_A", 1, 0), always("theta_B", 1, 1)};
  spec.user_types[1] = spec.latent_types[1];
  spec.user_priors[1] = {0.5, 0.5};
  spec.type_distribution =
      TypeDistribution(spec.latent_joint_indexer(), {0.5, 0.5});
  spec.positive_priors_declared = true;
  spec.validate();
  return spec;
}

// Pure distribution on theta_A, but theta_AB overlaps it half the time: the
// sum posterior settles on <2/3, 1/3> instead.
inline GameSpec example3_game() {
  GameSpec spec = repeated_game(2);
  spec.latent_types[1] = {
      always("theta_A", 1, 0),
      std::make_shared<TableStrategy>("theta_AB", 1, 2,
                                      std::map<StateId, std::vector<double>>{},
                                      std::vector<double>{0.5, 0.5})};
  spec.user_types[1] = spec.latent_types[1];
  spec.user_priors[1] = {0.5, 0.5};
  spec.type_distribution =
      TypeDistribution(spec.latent_joint_indexer(), {1.0, 0.0});
  spec.positive_priors_declared = true;
  spec.validate();
  return spec;
}

// Three players; players 1 and 2 never share a type. Per-player posteriors
// cannot express the constraint; the correlated posterior can.
inline GameSpec example4_game() {
  GameSpec spec = repeated_game(3);
  for (PlayerId j : {1, 2}) {
    spec.latent_types[j] = {always("theta_A", j, 0), always("theta_B", j, 1)};
    spec.user_types[j] = spec.latent_types[j];
    spec.user_priors[j] = {0.5, 0.5};
  }
  // Joint over (player1, player2): (A,B) and (B,A) only.
  spec.type_distribution =
      TypeDistribution(spec.latent_joint_indexer(), {0.0, 0.5, 0.5, 0.0});
  spec.positive_priors_declared = true;
  spec.validate();
  return spec;
}

enum class MatchingHypothesis { accurate, inaccurate, critical };

// The coordination task: the controlled player must pick the same action as
// the other player, whose true behaviour alternates L,R,L,R. Hypothesis
// spaces: the true type itself, the pair {always-R, L,R,R-cycle}, or the
// single opposite-phase R,L cycle.
inline GameSpec matching_game(MatchingHypothesis hypothesis) {
  GameSpec spec;
  spec.state_names = {"s0", "goal"};
  spec.initial_state = 0;
  spec.terminal = {false, true};
  spec.num_players = 2;
  spec.controlled_player = 0;
  spec.action_names = {{"L", "R"}, {"L", "R"}};
  ProfileIndexer ja = spec.joint_action_indexer();
  spec.transition = TransitionTable(2, ja);
  for (ActionId a = 0; a < 2; ++a)
    for (ActionId b = 0; b < 2; ++b)
      spec.transition.set_row(0, {a, b}, {{a == b ? 1 : 0, 1.0}});

  spec.latent_types.resize(2);
  spec.user_types.resize(2);
  spec.user_priors.resize(2);
  spec.latent_types[1] = {std::make_shared<PeriodicStrategy>(
      "theta_LR", 1, 2, std::vector<ActionId>{0, 1})};
  switch (hypothesis) {
    case MatchingHypothesis::accurate:
      spec.user_types[1] = spec.latent_types[1];
      spec.user_priors[1] = {1.0};
      break;
    case MatchingHypothesis::inaccurate:
      spec.user_types[1] = {
          std::make_shared<PeriodicStrategy>("star_R", 1, 2,
                                             std::vector<ActionId>{1}),
          std::make_shared<PeriodicStrategy>("star_LRR", 1, 2,
                                             std::vector<ActionId>{0, 1, 1})};
      spec.user_priors[1] = {0.5, 0.5};
      break;
    case MatchingHypothesis::critical:
      spec.user_types[1] = {std::make_shared<PeriodicStrategy>(
          "star_RL", 1, 2, std::vector<ActionId>{1, 0})};
      spec.user_priors[1] = {1.0};
      break;
  }
  spec.type_distribution = TypeDistribution(spec.latent_joint_indexer(), {1.0});
  spec.positive_priors_declared = true;
  spec.validate();
  return spec;
}

// Fast-termination preference separates the two phases of the task; with an
// undiscounted horizon the matching game ties immediate and delayed success.
inline PlanConfig matching_plan() { return {0.9, 2}; }

}  // namespace fixtures

// ---------------------------------------------------------------------------
// run_example: execute a fixture and check its documented outcome.
// ---------------------------------------------------------------------------

struct ExampleCheck {
  std::string description;
  bool pass = false;
  std::string detail;
};

struct ExampleReport {
  std::string name;
  LikelihoodKind posterior = LikelihoodKind::sum;
  std::uint64_t seed = 0;
  int steps = 0;
  std::vector<ExampleCheck> checks;
  std::string trace_excerpt;

  bool pass() const {
    for (const ExampleCheck& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace example_detail {

inline void add_check(ExampleReport& rep, const std::string& description,
                      bool pass, const std::string& detail) {
  rep.checks.push_back({description, pass, detail});
}

inline std::string excerpt(const TraceResult& trace, int rows = 5) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  std::ostringstream out;
  out << lines.front() << "\n";
  std::size_t start = lines.size() > static_cast<std::size_t>(rows)
                          ? lines.size() - rows
                          : 1;
  for (std::size_t k = start; k < lines.size(); ++k) out << lines[k] << "\n";
  return out.str();
}

inline std::string vec_str(const std::vector<double>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < v.size(); ++k)
    os << (k ? ", " : "") << format_double(v[k]);
  os << ")";
  return os.str();
}

inline ExampleReport run_trace_example(const std::string& name, const GameSpec& spec,
                                       LikelihoodKind kind, int steps,
                                       std::uint64_t seed) {
  ExampleReport rep;
  rep.name = name;
  rep.posterior = kind;
  rep.seed = seed;
  rep.steps = steps;

  UniformController controller(spec.num_actions(spec.controlled_player));
  Rng rng(seed);
  TraceResult trace =
      run_posterior_trace(spec, controller, kind, 1, steps, rng);
  rep.trace_excerpt = excerpt(trace);

  PlayerPosterior post = trace.final_beliefs.posterior(1);
  long events = trace.final_beliefs.degenerate_events();

  if (name == "ex2") {
    if (kind == LikelihoodKind::product) {
      // Both actions appear almost immediately under the half/half mixture,
      // zeroing every product likelihood.
      int fired_at = -1;
      for (const TraceRow& row : trace.rows)
        if (row.degenerate) {
          fired_at = row.t;
          break;
        }
      add_check(rep, "product posterior degenerates once both actions observed",
                events >= 1, "events=" + std::to_string(events) + " first_at=" +
                                 std::to_string(fired_at));
      add_check(rep, "degenerate fallback returns the prior",
                post.degenerate && std::abs(post.probs[0] - 0.5) < 1e-12,
                vec_str(post.probs));
    } else {
      add_check(rep, "posterior converges to (0.5, 0.5) within 0.02",
                std::abs(post.probs[0] - 0.5) <= 0.02 &&
                    std::abs(post.probs[1] - 0.5) <= 0.02,
                vec_str(post.probs));
    }
  } else if (name == "ex3") {
    if (kind == LikelihoodKind::product) {
      add_check(rep, "product posterior concentrates on theta_A (>= 0.99)",
                post.probs[0] >= 0.99, vec_str(post.probs));
    } else {
      add_check(rep, "sum posterior converges to (2/3, 1/3) within 0.02",
                std::abs(post.probs[0] - 2.0 / 3.0) <= 0.02 &&
                    std::abs(post.probs[1] - 1.0 / 3.0) <= 0.02,
                vec_str(post.probs));
    }
  } else if (name == "ex4") {
    std::vector<double> joint = trace.final_beliefs.combined();
    // Joint slots over (player1, player2): AA, AB, BA, BB.
    if (kind == LikelihoodKind::correlated) {
      add_check(rep, "correlated posterior puts 0.5 on each permitted pair",
                std::abs(joint[1] - 0.5) <= 0.02 && std::abs(joint[2] - 0.5) <= 0.02,
                vec_str(joint));
      add_check(rep, "correlated posterior puts < 0.01 on the diagonal pairs",
                joint[0] < 0.01 && joint[3] < 0.01, vec_str(joint));
    } else if (kind == LikelihoodKind::sum) {
      bool ok = true;
      for (double p : joint) ok = ok && std::abs(p - 0.25) <= 0.02;
      add_check(rep, "sum posterior assigns 0.25 to all four type pairs", ok,
                vec_str(joint));
    } else {
      add_check(rep, "product posterior degenerates (every type zeroed)",
                events >= 1, "events=" + std::to_string(events));
    }
  }
  return rep;
}

inline std::string episode_str(const GameSpec& spec, const EpisodeLog& log) {
  std::ostringstream os;
  write_episode_csv(os, spec, log);
  return os.str();
}

}  // namespace example_detail

// Runs one of the canonical fixtures and checks its documented outcome.
// steps <= 0 picks the fixture default.
inline ExampleReport run_example(const std::string& name, LikelihoodKind kind,
                                 int steps, std::uint64_t seed) {
  using namespace example_detail;
  if (name == "ex1") {
    // External randomisation of an epsilon-greedy learner over two actions.
    ExampleReport rep;
    rep.name = name;
    rep.posterior = kind;
    rep.seed = seed;
    rep.steps = steps > 0 ? steps : 1;
    RlTypeConfig cfg;
    cfg.epsilon0 = 0.2;
    cfg.anneal_start = 1000000;  // constant epsilon for the demonstration
    cfg.anneal_end = 2000000;
    auto type = make_rl_type("eps_greedy", 1, 2, cfg);
    History h(0);
    std::vector<double> dist = type->distribution(h, 0);
    add_check(rep, "external epsilon-greedy distribution is (1-eps/2, eps/2)",
              std::abs(dist[0] - 0.9) < 1e-12 && std::abs(dist[1] - 0.1) < 1e-12,
              vec_str(dist));
    std::vector<double> again = type->distribution(h, 0);
    add_check(rep, "identical history yields identical probabilities", dist == again,
              vec_str(again));
    return rep;
  }
  if (name == "ex2")
    return run_trace_example(name, fixtures::example2_game(), kind,
                             steps > 0 ? steps : 10000, seed);
  if (name == "ex3")
    return run_trace_example(name, fixtures::example3_game(), kind,
                             steps > 0 ? steps : 10000, seed);
  if (name == "ex4")
    return run_trace_example(name, fixtures::example4_game(), kind,
                             steps > 0 ? steps : 10000, seed);

  if (name == "ex5") {
    // Inaccurate but uncritical hypotheses: the task is solved by the second
    // decision at the latest, on every seed.
    ExampleReport rep;
    rep.name = name;
    rep.posterior = kind;
    rep.seed = seed;
    rep.steps = steps > 0 ? steps : 100;
    GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
    bool all_fast = true;
    std::string detail;
    for (std::uint64_t k = 0; k < 10; ++k) {
      HbaController controller(spec, kind, fixtures::matching_plan());
      Rng rng = Rng::substream(seed, k);
      EpisodeLog log = run_episode(spec, controller, rep.steps, rng);
      if (!(log.reached_terminal && log.steps.size() <= 2)) {
        all_fast = false;
        detail = "seed offset " + std::to_string(k) + ":\n" +
                 episode_str(spec, log);
        break;
      }
    }
    add_check(rep, "terminal reached within 2 steps on every seeded run", all_fast,
              detail.empty() ? "10/10 runs terminated within 2 steps" : detail);
    return rep;
  }

  if (name == "ex6") {
    // Criticality detection on both hypothesis variants.
    ExampleReport rep;
    rep.name = name;
    rep.posterior = kind;
    rep.seed = seed;
    rep.steps = steps > 0 ? steps : 100;

    {
      GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::critical);
      ChainBuildOptions opt;
      opt.process = ProcessKind::user_y;
      opt.posterior = kind;
      opt.plan = fixtures::matching_plan();
      opt.quotient.period = default_quotient_period(spec);
      ProcessChain y = build_chain(spec, opt);
      CriticalReport crit = detect_critical(y);
      add_check(rep, "opposite-phase hypothesis is critical with a 2-node witness",
                crit.critical && crit.witness.size() == 2,
                "critical=" + std::to_string(crit.critical) +
                    " witness_size=" + std::to_string(crit.witness.size()));
    }
    {
      GameSpec spec =
          fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
      ChainBuildOptions opt;
      opt.process = ProcessKind::user_y;
      opt.posterior = kind;
      opt.plan = fixtures::matching_plan();
      opt.quotient.period = default_quotient_period(spec);
      ProcessChain y = build_chain(spec, opt);
      CriticalReport crit = detect_critical(y);
      add_check(rep, "inaccurate {always-R, LRR} hypothesis is uncritical",
                !crit.critical, "critical=" + std::to_string(crit.critical));

      bool all_fast = true;
      std::string detail;
      for (std::uint64_t k = 0; k < 10; ++k) {
        HbaController controller(spec, kind, fixtures::matching_plan());
        Rng rng = Rng::substream(seed, k);
        EpisodeLog log = run_episode(spec, controller, rep.steps, rng);
        if (!(log.reached_terminal && log.steps.size() <= 2)) {
          all_fast = false;
          detail = episode_str(spec, log);
          break;
        }
      }
      add_check(rep, "user process reaches a terminal within 2 steps on every seed",
                all_fast, detail.empty() ? "10/10 runs" : detail);
    }
    return rep;
  }

  detail::fail("run_example: unknown example '" + name +
               "' (expected ex1..ex6)");
}

}  // namespace hba
