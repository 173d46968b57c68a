#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hba/csv.hpp"
#include "hba/examples.hpp"
#include "hba/figure1.hpp"
#include "hba/random_game.hpp"
#include "hba/rl_type.hpp"
#include "hba/scenario.hpp"

namespace hba {
namespace {

std::string transition_digest(const GameSpec& spec) {
  std::ostringstream os;
  ProfileIndexer ja = spec.joint_action_indexer();
  for (StateId s = 0; s < spec.num_states(); ++s) {
    if (spec.is_terminal(s)) continue;
    for (long long k = 0; k < ja.count(); ++k)
      for (const auto& [next, p] : spec.transition.row(s, k))
        os << s << ":" << k << ":" << next << ":" << format_double(p) << ";";
  }
  return os.str();
}

TEST(GenerateRandomSbg, SameSeedGivesIdenticalGames) {
  RandomSbgConfig cfg;
  cfg.num_states = 20;
  cfg.num_actions = 4;
  cfg.seed = 99;
  GameSpec a = generate_random_sbg(cfg);
  GameSpec b = generate_random_sbg(cfg);
  EXPECT_EQ(transition_digest(a), transition_digest(b));
  History h(0);
  for (std::size_t k = 0; k < a.latent_types[1].size(); ++k)
    EXPECT_EQ(a.latent_types[1][k]->distribution(h),
              b.latent_types[1][k]->distribution(h));
}

TEST(GenerateRandomSbg, DefaultDimensionsMatchTheExperimentSetup) {
  GameSpec spec = generate_random_sbg(RandomSbgConfig{});
  EXPECT_EQ(spec.num_states(), 100);
  EXPECT_EQ(spec.num_actions(0), 10);
  EXPECT_EQ(spec.num_players, 2);
  EXPECT_EQ(spec.latent_types[1].size(), 3u);
}

TEST(GenerateRandomSbg, BranchingOneMakesDeterministicRows) {
  RandomSbgConfig cfg;
  cfg.num_states = 10;
  cfg.num_actions = 2;
  cfg.branching = 1;
  cfg.seed = 5;
  GameSpec spec = generate_random_sbg(cfg);
  ProfileIndexer ja = spec.joint_action_indexer();
  for (StateId s = 0; s < spec.num_states(); ++s) {
    if (spec.is_terminal(s)) continue;
    for (long long k = 0; k < ja.count(); ++k) {
      const TransitionRow& row = spec.transition.row(s, k);
      ASSERT_EQ(row.size(), 1u);
      EXPECT_DOUBLE_EQ(row[0].second, 1.0);
    }
  }
}

TEST(RlType, EpsilonScheduleIsPiecewiseLinear) {
  RlTypeConfig cfg;
  cfg.epsilon0 = 0.7;
  cfg.anneal_start = 1000;
  cfg.anneal_end = 2000;
  EXPECT_DOUBLE_EQ(cfg.epsilon(0), 0.7);
  EXPECT_DOUBLE_EQ(cfg.epsilon(999), 0.7);
  EXPECT_DOUBLE_EQ(cfg.epsilon(1000), 0.7);
  EXPECT_DOUBLE_EQ(cfg.epsilon(1500), 0.35);
  EXPECT_DOUBLE_EQ(cfg.epsilon(2000), 0.0);
  EXPECT_DOUBLE_EQ(cfg.epsilon(3000), 0.0);
}

TEST(RlType, FrozenLearnerIsDeterministic) {
  RlTypeConfig cfg;
  cfg.epsilon0 = 0.7;
  cfg.anneal_start = 2;
  cfg.anneal_end = 4;
  auto type = make_rl_type("rl", 1, 4, cfg);
  History h(0);
  for (int t = 0; t < 6; ++t) h.push({0, 1}, 0);
  std::vector<double> dist = type->distribution(h);  // t = 6 >= anneal_end
  int point_masses = 0;
  for (double p : dist) {
    EXPECT_TRUE(p == 0.0 || p == 1.0);
    if (p == 1.0) ++point_masses;
  }
  EXPECT_EQ(point_masses, 1);
}

TEST(RlType, DifferentSeedsLearnDifferentGreedyPolicies) {
  RlTypeConfig a_cfg, b_cfg;
  a_cfg.payoff_seed = 1;
  b_cfg.payoff_seed = 2;
  auto a = make_rl_type("a", 1, 6, a_cfg);
  auto b = make_rl_type("b", 1, 6, b_cfg);
  ASSERT_NE(a->preferred_action(), b->preferred_action());

  // Train both off the same observation stream touching every action.
  History h(0);
  Rng rng(3);
  for (int t = 0; t < 400; ++t) {
    JointAction joint = {0, rng.uniform_int(6)};
    h.push(joint, 0);
  }
  EXPECT_NE(a->greedy_action(h, h.length()), b->greedy_action(h, h.length()));
  EXPECT_EQ(a->greedy_action(h, h.length()), a->preferred_action());
  EXPECT_EQ(b->greedy_action(h, h.length()), b->preferred_action());
}

TEST(Figure1, FixedSeedGivesIdenticalTraceBytes) {
  Figure1Params params;
  params.num_states = 12;
  params.num_actions = 4;
  params.steps = 300;
  params.anneal_start = 100;
  params.anneal_end = 200;
  auto render = [&] {
    TraceResult trace = run_figure1(params, 77);
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
  };
  EXPECT_EQ(render(), render());
}

TEST(Figure1, DiagnosticsDoNotIncreaseAfterExplorationFreezes) {
  Figure1Params params;
  params.num_states = 15;
  params.num_actions = 5;
  params.steps = 600;
  params.anneal_start = 150;
  params.anneal_end = 300;
  TraceResult trace = run_figure1(params, 3);
  for (const TraceRow& row : trace.rows) EXPECT_LE(row.error, 2.0);  // L1 bound
  for (std::size_t k = static_cast<std::size_t>(params.anneal_end) + 1;
       k < trace.rows.size(); ++k) {
    EXPECT_LE(trace.rows[k].as, trace.rows[k - 1].as + 1e-12) << "t=" << k;
    EXPECT_LE(trace.rows[k].ao, trace.rows[k - 1].ao + 1e-12) << "t=" << k;
  }
}

TEST(RunExample, OutcomesHoldAcrossATenSeedPanel) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EXPECT_TRUE(run_example("ex1", LikelihoodKind::sum, 0, seed).pass());
    EXPECT_TRUE(run_example("ex2", LikelihoodKind::product, 3000, seed).pass());
    EXPECT_TRUE(run_example("ex2", LikelihoodKind::sum, 10000, seed).pass());
    EXPECT_TRUE(run_example("ex3", LikelihoodKind::product, 3000, seed).pass());
    EXPECT_TRUE(run_example("ex3", LikelihoodKind::sum, 10000, seed).pass());
    EXPECT_TRUE(run_example("ex4", LikelihoodKind::sum, 10000, seed).pass());
    EXPECT_TRUE(run_example("ex4", LikelihoodKind::correlated, 10000, seed).pass());
  }
  // The fixture-heavy examples carry their own internal seed panels.
  EXPECT_TRUE(run_example("ex5", LikelihoodKind::product, 0, 1).pass());
  EXPECT_TRUE(run_example("ex6", LikelihoodKind::product, 0, 1).pass());
}

TEST(RunExample, UnknownNameIsRejected) {
  EXPECT_THROW(run_example("ex7", LikelihoodKind::sum, 0, 1), std::runtime_error);
}

TEST(EmitPlotData, EmptyTraceGivesHeaderOnly) {
  std::istringstream in("t,kind,post_a,error,ao,as,degenerate\n");
  std::ostringstream out;
  emit_plot_data(in, out, 10);
  EXPECT_EQ(out.str(), "# t error\n");
}

TEST(EmitPlotData, StrideTenKeepsEveryTenthRow) {
  std::ostringstream trace;
  trace << "t,kind,post_a,error,ao,as,degenerate\n";
  for (int t = 0; t < 3000; ++t)
    trace << t << ",sum,0.5,0.25,0,0,0\n";
  std::istringstream in(trace.str());
  std::ostringstream out;
  emit_plot_data(in, out, 10);
  std::istringstream check(out.str());
  std::string line;
  int rows = -1;  // discount the header
  while (std::getline(check, line)) ++rows;
  EXPECT_EQ(rows, 300);
}

TEST(EmitPlotData, ColumnsMatchTheDocumentedSchema) {
  std::istringstream in("t,kind,post_a,error,ao,as,degenerate\n5,sum,1,0.5,0,0,0\n");
  std::ostringstream out;
  emit_plot_data(in, out, 1);
  std::istringstream check(out.str());
  std::string header, row;
  std::getline(check, header);
  std::getline(check, row);
  EXPECT_EQ(header, "# t error");
  EXPECT_EQ(row, "5 0.5");
}

TEST(EmitPlotData, RejectsTracesWithoutErrorColumn) {
  std::istringstream in("t,kind\n1,sum\n");
  std::ostringstream out;
  EXPECT_THROW(emit_plot_data(in, out, 1), std::runtime_error);
}

TEST(ScenarioLoader, ParsesTheMatchingGameScenario) {
  const char* dir = std::getenv("HBA_SCENARIO_DIR");
  std::string base = dir ? dir : "scenarios";
  Scenario sc = load_scenario_file(base + "/ex6_critical.json");
  EXPECT_EQ(sc.experiment, "verify");
  EXPECT_EQ(sc.game.num_states(), 2);
  EXPECT_EQ(sc.game.user_types[1].size(), 1u);
  EXPECT_EQ(sc.controller.plan.horizon, 2);
  EXPECT_DOUBLE_EQ(sc.controller.plan.gamma, 0.9);
  EXPECT_EQ(sc.verify.quotient_period, 2);
  // The loaded scenario reproduces the in-code fixture's verdict.
  ProcessChain y = build_chain(sc.game, chain_options(sc, ProcessKind::user_y));
  EXPECT_TRUE(detect_critical(y).critical);
}

TEST(ScenarioLoader, RejectsMalformedDocuments) {
  nlohmann::json j;
  j["name"] = "broken";
  j["experiment"] = "episode";
  j["game"] = {{"states", {"s"}},
               {"initial", "s"},
               {"terminals", nlohmann::json::array()},
               {"players", 2},
               {"actions", {{"A"}, {"A"}}},
               {"transitions", nlohmann::json::array()},  // missing row
               {"latent_types",
                {{"1", {{{"kind", "periodic"}, {"id", "t"}, {"sequence", {"A"}}}}}}},
               {"user_types",
                {{"1", {{{"kind", "periodic"}, {"id", "t"}, {"sequence", {"A"}}}}}}},
               {"type_distribution",
                {{{"profile", {{"1", "t"}}}, {"prob", 1.0}}}}};
  EXPECT_THROW(parse_scenario(j), std::exception);
}

TEST(ScenarioLoader, DefaultQuotientPeriodIsTheStrategyLcm) {
  GameSpec spec = fixtures::matching_game(fixtures::MatchingHypothesis::inaccurate);
  EXPECT_EQ(default_quotient_period(spec), 6);  // lcm(2, 1, 3)
}

TEST(EpisodeCsv, ColumnsAndDeterminism) {
  GameSpec spec = fixtures::example2_game();
  auto render = [&] {
    UniformController controller(2);
    Rng rng(11);
    EpisodeLog log = run_episode(spec, controller, 25, rng);
    std::ostringstream os;
    write_episode_csv(os, spec, log);
    return os.str();
  };
  std::string text = render();
  EXPECT_EQ(render(), text);
  std::istringstream is(text);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "t,state,joint_action,sampled_types,reward");
  std::string first;
  std::getline(is, first);
  EXPECT_EQ(first.substr(0, 4), "0,s,");
}

}  // namespace
}  // namespace hba
