#include "hba/planner.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "hba/episode.hpp"
#include "hba/examples.hpp"
#include "hba/random_game.hpp"

namespace hba {
namespace {

// ---------------------------------------------------------------------------
// Test oracles. Independent of the production recursion: the first is a
// literal transcription of the expected-payoff definition with the joint
// type mixture expanded at every node; the second enumerates concrete paths
// under the greedy policy and accumulates the probability of entering a
// terminal state.
// ---------------------------------------------------------------------------

double oracle_expected(const GameSpec& spec,
                       const std::vector<std::vector<StrategyPtr>>& types,
                       const std::vector<double>& weights, History hhat, StateId s,
                       ActionId ai, int budget, double gamma);

double oracle_best(const GameSpec& spec,
                   const std::vector<std::vector<StrategyPtr>>& types,
                   const std::vector<double>& weights, const History& hhat,
                   StateId s, int budget, double gamma) {
  double best = 0.0;
  for (ActionId ai = 0; ai < spec.num_actions(spec.controlled_player); ++ai)
    best = std::max(best,
                    oracle_expected(spec, types, weights, hhat, s, ai, budget, gamma));
  return best;
}

double oracle_expected(const GameSpec& spec,
                       const std::vector<std::vector<StrategyPtr>>& types,
                       const std::vector<double>& weights, History hhat, StateId s,
                       ActionId ai, int budget, double gamma) {
  if (spec.is_terminal(s) || budget <= 0) return 0.0;
  std::vector<PlayerId> others = spec.other_players();
  std::vector<int> type_sizes, action_sizes;
  for (PlayerId j : others) {
    type_sizes.push_back(static_cast<int>(types[j].size()));
    action_sizes.push_back(spec.num_actions(j));
  }
  ProfileIndexer types_idx(type_sizes), actions_idx(action_sizes);

  double e = 0.0;
  for (long long tk = 0; tk < types_idx.count(); ++tk) {
    if (weights[tk] == 0.0) continue;
    std::vector<int> profile = types_idx.unflatten(tk);
    for (long long ak = 0; ak < actions_idx.count(); ++ak) {
      std::vector<int> acts = actions_idx.unflatten(ak);
      double pi_product = 1.0;
      JointAction joint(spec.num_players);
      joint[spec.controlled_player] = ai;
      for (std::size_t slot = 0; slot < others.size(); ++slot) {
        PlayerId j = others[slot];
        pi_product *= types[j][profile[slot]]->distribution(hhat)[acts[slot]];
        joint[j] = acts[slot];
      }
      if (pi_product == 0.0) continue;
      double q = 0.0;
      for (const auto& [next, tp] : spec.transition.row(s, joint)) {
        double value = entry_reward(spec, s, next);
        if (budget > 1 && !spec.is_terminal(next)) {
          History extended = hhat;
          extended.push(joint, next);
          value += gamma *
                   oracle_best(spec, types, weights, extended, next, budget - 1, gamma);
        }
        q += tp * value;
      }
      e += weights[tk] * pi_product * q;
    }
  }
  return e;
}

// Probability of entering a terminal state within `budget` steps when the
// controlled player follows the greedy policy extracted from the planner and
// the others follow the belief-mixed prediction. Depth-first over concrete
// paths.
double oracle_reach_under_greedy(const GameSpec& spec,
                                 const std::vector<std::vector<StrategyPtr>>& types,
                                 const std::vector<double>& weights, History& hhat,
                                 int budget, double gamma) {
  StateId s = hhat.current_state();
  if (spec.is_terminal(s) || budget <= 0) return 0.0;
  PlanResult plan = plan_actions(spec, types, weights, hhat, budget, gamma);
  ActionId ai = plan.argmax.front();

  std::vector<PlayerId> others = spec.other_players();
  std::vector<int> action_sizes;
  for (PlayerId j : others) action_sizes.push_back(spec.num_actions(j));
  ProfileIndexer actions_idx(action_sizes);
  std::vector<double> pred =
      planner_detail::predicted_joint_others(spec, types, weights, hhat);

  double reach = 0.0;
  JointAction joint(spec.num_players);
  for (long long ak = 0; ak < actions_idx.count(); ++ak) {
    if (pred[ak] <= 0.0) continue;
    std::vector<int> acts = actions_idx.unflatten(ak);
    joint[spec.controlled_player] = ai;
    for (std::size_t slot = 0; slot < others.size(); ++slot)
      joint[others[slot]] = acts[slot];
    for (const auto& [next, tp] : spec.transition.row(s, joint)) {
      if (tp <= 0.0) continue;
      if (spec.is_terminal(next)) {
        reach += pred[ak] * tp;
      } else if (budget > 1) {
        hhat.push(joint, next);
        reach += pred[ak] * tp *
                 oracle_reach_under_greedy(spec, types, weights, hhat, budget - 1,
                                           gamma);
        hhat.pop();
      }
    }
  }
  return reach;
}

GameSpec small_random_game(std::uint64_t seed) {
  RandomSbgConfig cfg;
  cfg.num_states = 6;
  cfg.num_actions = 3;
  cfg.num_players = 2;
  cfg.num_types = 2;
  cfg.branching = 2;
  cfg.seed = seed;
  return generate_random_sbg(cfg);
}

// ---------------------------------------------------------------------------

TEST(ExpectedPayoff, TerminalStateIsWorthZeroForAllActions) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
  std::vector<double> weights = spec.product_user_prior();
  History h(1);  // start at the goal state
  PlanResult plan = plan_actions(spec, spec.user_types, weights, h, 3, 1.0);
  EXPECT_DOUBLE_EQ(plan.values[0], 0.0);
  EXPECT_DOUBLE_EQ(plan.values[1], 0.0);
  EXPECT_EQ(plan.argmax.size(), 2u);
}

TEST(ExpectedPayoff, OneStepWinIsWorthOne) {
  // Both joint actions under ai=0 move into the terminal state.
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::accurate);
  std::vector<double> weights = {1.0};
  History h(0);
  // theta_LR plays L at t=0; matching action L (=0) wins with certainty.
  double e = expected_payoff(spec, spec.user_types, weights, h, 0, 1, 1.0);
  EXPECT_DOUBLE_EQ(e, 1.0);
}

TEST(ExpectedPayoff, MatchingGameSymmetricBeliefsTieAtOneHalf) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
  std::vector<double> weights = {0.5, 0.5};
  History h(0);
  PlanResult plan = plan_actions(spec, spec.user_types, weights, h, 1, 1.0);
  EXPECT_DOUBLE_EQ(plan.values[0], 0.5);
  EXPECT_DOUBLE_EQ(plan.values[1], 0.5);
  EXPECT_EQ(plan.argmax, (std::vector<ActionId>{0, 1}));
  EXPECT_DOUBLE_EQ(plan.policy[0], 0.5);
  EXPECT_DOUBLE_EQ(plan.policy[1], 0.5);
}

TEST(ExpectedPayoff, HypotheticalHistoryAdvancesTypePhases) {
  // One step into the game the remaining hypotheses both predict R, so the
  // matching action R is surely believed to win.
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
  std::vector<double> weights = {0.5, 0.5};
  History h(0);
  h.push({1, 0}, 0);  // missed at t=0
  PlanResult plan = plan_actions(spec, spec.user_types, weights, h, 1, 1.0);
  EXPECT_DOUBLE_EQ(plan.values[1], 1.0);
  EXPECT_DOUBLE_EQ(plan.values[0], 0.0);
  EXPECT_EQ(plan.argmax, (std::vector<ActionId>{1}));
}

TEST(ActionValue, AllSuccessorsTerminalPayExactlyOne) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::accurate);
  std::vector<double> weights = {1.0};
  History h(0);
  for (double gamma : {0.2, 0.9, 1.0}) {
    double q = action_value(spec, spec.user_types, weights, h, {0, 0}, 4, gamma);
    EXPECT_DOUBLE_EQ(q, 1.0);
  }
}

TEST(ActionValue, SelfLoopWithoutTerminalIsZero) {
  GameSpec spec = fixtures::example2_game();  // terminal-free single state
  std::vector<double> weights = spec.product_user_prior();
  History h(0);
  for (int budget : {1, 3, 6})
    EXPECT_DOUBLE_EQ(
        action_value(spec, spec.user_types, weights, h, {0, 0}, budget, 1.0), 0.0);
}

TEST(ActionValue, CoinChainThreeStepValue) {
  // One action; successor is terminal with probability one half, else stay.
  GameSpec spec;
  spec.state_names = {"s0", "goal"};
  spec.initial_state = 0;
  spec.terminal = {false, true};
  spec.num_players = 2;
  spec.action_names = {{"go"}, {"wait"}};
  spec.transition = TransitionTable(2, spec.joint_action_indexer());
  spec.transition.set_row(0, {0, 0}, {{0, 0.5}, {1, 0.5}});
  spec.latent_types.resize(2);
  spec.user_types.resize(2);
  spec.user_priors.resize(2);
  spec.latent_types[1] = {fixtures::always("wait", 1, 0, 1)};
  spec.user_types[1] = spec.latent_types[1];
  spec.user_priors[1] = {1.0};
  spec.type_distribution = TypeDistribution(spec.latent_joint_indexer(), {1.0});
  spec.validate();

  std::vector<double> weights = {1.0};
  History h(0);
  double q = action_value(spec, spec.user_types, weights, h, {0, 0}, 3, 1.0);
  EXPECT_NEAR(q, 0.875, 1e-12);  // 1 - 0.5^3
}

TEST(SelectAction, UniqueMaximiserIsCertain) {
  PlanResult plan;
  plan.values = {0.2, 0.7, 0.1};
  plan.argmax = {1};
  plan.policy = {0.0, 1.0, 0.0};
  Rng rng(3);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(select_action(plan, rng), 1);
}

TEST(SelectAction, TwoWayTieSplitsEvenly) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
  std::vector<double> weights = {0.5, 0.5};
  History h(0);
  PlanResult plan = plan_actions(spec, spec.user_types, weights, h, 1, 1.0);
  Rng rng(7);
  int left = 0;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k)
    if (select_action(plan, rng) == 0) ++left;
  EXPECT_NEAR(left / static_cast<double>(draws), 0.5, 0.02);
}

TEST(HbaPolicy, InaccurateHypothesesStillSolveWithinTwoSteps) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    HbaController controller(spec, LikelihoodKind::product, fixtures::matching_plan());
    Rng rng(seed);
    EpisodeLog log = run_episode(spec, controller, 100, rng);
    EXPECT_TRUE(log.reached_terminal) << "seed " << seed;
    EXPECT_LE(log.steps.size(), 2u) << "seed " << seed;
  }
}

TEST(HbaPolicy, CriticalHypothesisCyclesForever) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::critical);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    HbaController controller(spec, LikelihoodKind::product, fixtures::matching_plan());
    Rng rng(seed);
    EpisodeLog log = run_episode(spec, controller, 100, rng);
    EXPECT_FALSE(log.reached_terminal) << "seed " << seed;
    EXPECT_EQ(log.steps.size(), 100u);
  }
}

TEST(HbaPolicy, AccurateSingleTypeMatchesTheIdealProcess) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::accurate);
  HbaController hba(spec, LikelihoodKind::product, fixtures::matching_plan());
  OracleController oracle(spec, fixtures::matching_plan());
  Rng rng_a(5), rng_b(5);
  EpisodeLog a = run_episode(spec, hba, 50, rng_a);
  EpisodeLog b = run_episode(spec, oracle, 50, rng_b);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k)
    EXPECT_EQ(a.steps[k].action, b.steps[k].action);
}

// ---------------------------------------------------------------------------
// Oracle equivalences and properties.
// ---------------------------------------------------------------------------

TEST(PlannerOracle, MatchesNaiveTranscriptionOnRandomGames) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    GameSpec spec = small_random_game(seed);
    std::vector<double> weights = spec.product_user_prior();
    History h(spec.initial_state);
    for (int budget = 1; budget <= 3; ++budget) {
      for (double gamma : {0.7, 1.0}) {
        PlanResult plan = plan_actions(spec, spec.user_types, weights, h, budget, gamma);
        for (ActionId ai = 0; ai < spec.num_actions(0); ++ai) {
          double expect = oracle_expected(spec, spec.user_types, weights, h,
                                          spec.initial_state, ai, budget, gamma);
          EXPECT_NEAR(plan.values[ai], expect, 1e-12)
              << "seed " << seed << " budget " << budget << " gamma " << gamma;
        }
      }
    }
  }
}

TEST(PlannerOracle, UndiscountedValueEqualsGreedyPathReachProbability) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    GameSpec spec = small_random_game(seed);
    std::vector<double> weights = spec.product_user_prior();
    for (int budget = 1; budget <= 4; ++budget) {
      History h(spec.initial_state);
      PlanResult plan = plan_actions(spec, spec.user_types, weights, h, budget, 1.0);
      History scratch(spec.initial_state);
      double reach =
          oracle_reach_under_greedy(spec, spec.user_types, weights, scratch, budget, 1.0);
      EXPECT_NEAR(plan.max_value(), reach, 1e-9)
          << "seed " << seed << " budget " << budget;
    }
  }
}

TEST(PlannerProperty, UndiscountedValuesAreMonotoneInHorizon) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GameSpec spec = small_random_game(seed);
    std::vector<double> weights = spec.product_user_prior();
    std::vector<double> previous(spec.num_actions(0), -1.0);
    for (int budget = 1; budget <= 4; ++budget) {
      History h(spec.initial_state);
      PlanResult plan = plan_actions(spec, spec.user_types, weights, h, budget, 1.0);
      for (ActionId ai = 0; ai < spec.num_actions(0); ++ai) {
        EXPECT_GE(plan.values[ai], previous[ai] - 1e-12);
        EXPECT_GE(plan.values[ai], -1e-15);
        EXPECT_LE(plan.values[ai], 1.0 + 1e-12);
      }
      previous = plan.values;
    }
  }
}

// Posterior normalisation cannot change chosen actions: likelihoods scaled
// by any positive constant renormalise to the same belief table.
TEST(PlannerProperty, ArgmaxInvariantUnderLikelihoodRescaling) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GameSpec spec = small_random_game(seed);
    UniformController controller(spec.num_actions(0));
    Rng rng(seed);
    History h = run_episode(spec, controller, 10, rng).history();

    std::vector<double> likes, prior;
    for (std::size_t k = 0; k < spec.user_types[1].size(); ++k) {
      likes.push_back(sum_likelihood(h, *spec.user_types[1][k]));
      prior.push_back(spec.user_priors[1][k]);
    }
    std::vector<double> scaled = likes;
    for (double& l : scaled) l *= 3.7;

    std::vector<double> weights_a =
        combined_posterior({posterior_from_likelihoods(likes, prior).probs});
    std::vector<double> weights_b =
        combined_posterior({posterior_from_likelihoods(scaled, prior).probs});

    History h1 = h, h2 = h;
    PlanResult a = plan_actions(spec, spec.user_types, weights_a, h1, 3, 1.0);
    PlanResult b = plan_actions(spec, spec.user_types, weights_b, h2, 3, 1.0);
    EXPECT_EQ(a.argmax, b.argmax) << "seed " << seed;
  }
}

TEST(PlannerProperty, PlanningLeavesTheScratchHistoryIntact) {
  GameSpec spec = small_random_game(2);
  std::vector<double> weights = spec.product_user_prior();
  History h(spec.initial_state);
  h.push(JointAction(2, 0), spec.transition.row(spec.initial_state,
                                                JointAction(2, 0))[0].first);
  History before = h;
  plan_actions(spec, spec.user_types, weights, h, 4, 1.0);
  EXPECT_EQ(h, before);
}

TEST(PlanConfig, RejectsBadParameters) {
  EXPECT_THROW((PlanConfig{1.2, 1}).validate(), std::runtime_error);
  EXPECT_THROW((PlanConfig{0.5, 0}).validate(), std::runtime_error);
}

}  // namespace
}  // namespace hba
