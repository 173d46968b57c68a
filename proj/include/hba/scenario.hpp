#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hba/beliefs.hpp"
#include "hba/chain_builder.hpp"
#include "hba/common.hpp"
#include "hba/figure1.hpp"
#include "hba/game.hpp"
#include "hba/planner.hpp"
#include "hba/random_game.hpp"
#include "hba/rl_type.hpp"
#include "hba/strategy.hpp"

namespace hba {

struct ControllerConfig {
  std::string kind = "hba";  // hba | uniform | oracle
  LikelihoodKind posterior = LikelihoodKind::product;
  PlanConfig plan;
};

struct RunConfig {
  int steps = 100;
  std::vector<std::uint64_t> seeds = {1};
};

struct VerifyConfig {
  int quotient_period = 0;  // 0: derive from the periodic strategies
  int t_max = 50;
};

// A declarative experiment: a game (inline or generated), a controller, run
// parameters and, depending on the experiment kind, verification or figure
// settings. Seeds are always explicit.
struct Scenario {
  std::string name;
  std::string experiment = "episode";  // episode | posterior-trace | figure1 | verify
  GameSpec game;
  ControllerConfig controller;
  RunConfig run;
  VerifyConfig verify;
  std::optional<Figure1Params> figure1;
  PlayerId tracked_player = -1;  // posterior traces; default: first other player

  PlayerId tracked_or_default() const {
    return tracked_player >= 0 ? tracked_player : game.other_players().front();
  }
};

inline LikelihoodKind parse_likelihood_kind(const std::string& s) {
  if (s == "product") return LikelihoodKind::product;
  if (s == "sum") return LikelihoodKind::sum;
  if (s == "correlated") return LikelihoodKind::correlated;
  detail::fail("scenario: unknown posterior kind '" + s + "'");
}

namespace scenario_detail {

using nlohmann::json;

inline int state_index(const GameSpec& spec, const std::string& name) {
  for (int s = 0; s < spec.num_states(); ++s)
    if (spec.state_names[s] == name) return s;
  detail::fail("scenario: unknown state '" + name + "'");
}

inline ActionId action_index(const GameSpec& spec, PlayerId p, const std::string& name) {
  for (int a = 0; a < spec.num_actions(p); ++a)
    if (spec.action_names[p][a] == name) return a;
  detail::fail("scenario: unknown action '" + name + "' for player " +
               std::to_string(p));
}

inline StrategyPtr parse_type(const json& jt, const GameSpec& spec, PlayerId p) {
  std::string kind = jt.at("kind").get<std::string>();
  std::string id = jt.at("id").get<std::string>();
  int na = spec.num_actions(p);
  if (kind == "periodic" || kind == "deterministic-sequence") {
    std::vector<ActionId> seq;
    for (const json& ja : jt.at("sequence"))
      seq.push_back(action_index(spec, p, ja.get<std::string>()));
    if (kind == "periodic")
      return std::make_shared<PeriodicStrategy>(id, p, na, std::move(seq));
    return std::make_shared<DeterministicSequenceStrategy>(id, p, na, std::move(seq));
  }
  if (kind == "table") {
    std::map<StateId, std::vector<double>> rows;
    if (jt.contains("rows")) {
      for (const auto& [sname, row] : jt.at("rows").items())
        rows.emplace(state_index(spec, sname), row.get<std::vector<double>>());
    }
    std::vector<double> def;
    if (jt.contains("default")) def = jt.at("default").get<std::vector<double>>();
    return std::make_shared<TableStrategy>(id, p, na, std::move(rows), std::move(def));
  }
  if (kind == "uniform") return make_uniform_strategy(id, p, na);
  if (kind == "epsilon-greedy-learner") {
    RlTypeConfig cfg;
    cfg.payoff_seed = jt.value("payoff_seed", 0ULL);
    cfg.learning_rate = jt.value("learning_rate", 0.6);
    cfg.epsilon0 = jt.value("epsilon0", 0.7);
    cfg.anneal_start = jt.value("anneal_start", 1000);
    cfg.anneal_end = jt.value("anneal_end", 2000);
    return make_rl_type(id, p, na, cfg);
  }
  detail::fail("scenario: unknown type kind '" + kind + "'");
}

inline int type_index(const std::vector<StrategyPtr>& types, const std::string& id) {
  for (std::size_t k = 0; k < types.size(); ++k)
    if (types[k]->id() == id) return static_cast<int>(k);
  detail::fail("scenario: unknown type id '" + id + "'");
}

// Flattened table over joint profiles of the other players, from an array of
// {"profile": {player: type_id}, "prob": p} entries.
inline std::vector<double> parse_profile_table(
    const json& entries, const GameSpec& spec,
    const std::vector<std::vector<StrategyPtr>>& spaces) {
  std::vector<int> sizes;
  for (PlayerId j : spec.other_players())
    sizes.push_back(static_cast<int>(spaces[j].size()));
  ProfileIndexer idx(sizes);
  std::vector<double> table(idx.count(), 0.0);
  for (const json& e : entries) {
    std::vector<int> profile(idx.slots(), -1);
    for (const auto& [pstr, tid] : e.at("profile").items()) {
      PlayerId j = std::stoi(pstr);
      detail::require(j != spec.controlled_player && j >= 0 && j < spec.num_players,
                      "scenario: bad player in profile: " + pstr);
      profile[spec.other_slot(j)] = type_index(spaces[j], tid.get<std::string>());
    }
    for (int slot = 0; slot < idx.slots(); ++slot)
      detail::require(profile[slot] >= 0, "scenario: profile misses a player");
    table[idx.flatten(profile)] += e.at("prob").get<double>();
  }
  return table;
}

inline GameSpec parse_game(const json& jg) {
  if (jg.contains("random")) {
    const json& jr = jg.at("random");
    RandomSbgConfig cfg;
    cfg.num_states = jr.value("states", cfg.num_states);
    cfg.num_actions = jr.value("actions", cfg.num_actions);
    cfg.num_players = jr.value("players", cfg.num_players);
    cfg.num_types = jr.value("types", cfg.num_types);
    cfg.branching = jr.value("branching", cfg.branching);
    cfg.terminal_free = jr.value("terminal_free", cfg.terminal_free);
    cfg.pure_type_distribution = jr.value("pure", cfg.pure_type_distribution);
    cfg.seed = jr.value("seed", cfg.seed);
    return generate_random_sbg(cfg);
  }

  GameSpec spec;
  spec.state_names = jg.at("states").get<std::vector<std::string>>();
  spec.terminal.assign(spec.state_names.size(), false);
  spec.num_players = jg.value("players", 2);
  spec.controlled_player = jg.value("controlled_player", 0);
  spec.initial_state = state_index(spec, jg.at("initial").get<std::string>());
  for (const json& t : jg.at("terminals"))
    spec.terminal[state_index(spec, t.get<std::string>())] = true;

  spec.action_names.clear();
  for (const json& row : jg.at("actions"))
    spec.action_names.push_back(row.get<std::vector<std::string>>());
  detail::require(static_cast<int>(spec.action_names.size()) == spec.num_players,
                  "scenario: one action list per player expected");

  spec.transition = TransitionTable(spec.num_states(), spec.joint_action_indexer());
  for (const json& jrow : jg.at("transitions")) {
    StateId s = state_index(spec, jrow.at("state").get<std::string>());
    JointAction a(spec.num_players);
    const json& ja = jrow.at("action");
    detail::require(static_cast<int>(ja.size()) == spec.num_players,
                    "scenario: joint action arity");
    for (PlayerId p = 0; p < spec.num_players; ++p)
      a[p] = action_index(spec, p, ja[p].get<std::string>());
    TransitionRow row;
    for (const auto& [sname, prob] : jrow.at("next").items())
      row.emplace_back(state_index(spec, sname), prob.get<double>());
    std::sort(row.begin(), row.end());
    spec.transition.set_row(s, a, std::move(row));
  }

  spec.latent_types.resize(spec.num_players);
  spec.user_types.resize(spec.num_players);
  spec.user_priors.resize(spec.num_players);
  for (const auto& [pstr, types] : jg.at("latent_types").items()) {
    PlayerId j = std::stoi(pstr);
    for (const json& jt : types) spec.latent_types[j].push_back(parse_type(jt, spec, j));
  }
  for (const auto& [pstr, types] : jg.at("user_types").items()) {
    PlayerId j = std::stoi(pstr);
    for (const json& jt : types) spec.user_types[j].push_back(parse_type(jt, spec, j));
  }

  spec.type_distribution = TypeDistribution(
      spec.latent_joint_indexer(),
      parse_profile_table(jg.at("type_distribution"), spec, spec.latent_types));

  for (PlayerId j : spec.other_players()) {
    spec.user_priors[j].assign(spec.user_types[j].size(),
                               1.0 / spec.user_types[j].size());
  }
  if (jg.contains("priors")) {
    for (const auto& [pstr, jp] : jg.at("priors").items()) {
      PlayerId j = std::stoi(pstr);
      std::vector<double> prior(spec.user_types[j].size(), 0.0);
      for (const auto& [tid, prob] : jp.items())
        prior[type_index(spec.user_types[j], tid)] = prob.get<double>();
      spec.user_priors[j] = std::move(prior);
    }
  }
  if (jg.contains("joint_prior"))
    spec.joint_user_prior =
        parse_profile_table(jg.at("joint_prior"), spec, spec.user_types);
  spec.positive_priors_declared = jg.value("positive_priors", false);

  spec.validate();
  return spec;
}

inline Figure1Params parse_figure1(const json& jf) {
  Figure1Params params;
  params.num_states = jf.value("states", params.num_states);
  params.num_actions = jf.value("actions", params.num_actions);
  params.num_types = jf.value("types", params.num_types);
  params.branching = jf.value("branching", params.branching);
  params.steps = jf.value("steps", params.steps);
  params.epsilon0 = jf.value("epsilon0", params.epsilon0);
  params.anneal_start = jf.value("anneal_start", params.anneal_start);
  params.anneal_end = jf.value("anneal_end", params.anneal_end);
  params.learning_rate = jf.value("learning_rate", params.learning_rate);
  if (jf.contains("delta")) params.delta = jf.at("delta").get<std::vector<double>>();
  if (jf.contains("posterior"))
    params.posterior = parse_likelihood_kind(jf.at("posterior").get<std::string>());
  return params;
}

}  // namespace scenario_detail

// Least common multiple of the periods of all periodic strategies in the
// game: the default quotient granularity for chain construction.
inline int default_quotient_period(const GameSpec& spec) {
  long long period = 1;
  auto fold = [&](const StrategyPtr& ts) {
    if (const auto* p = dynamic_cast<const PeriodicStrategy*>(ts.get()))
      period = std::lcm(period, static_cast<long long>(p->period()));
  };
  for (PlayerId j : spec.other_players()) {
    for (const StrategyPtr& ts : spec.latent_types[j]) fold(ts);
    for (const StrategyPtr& ts : spec.user_types[j]) fold(ts);
  }
  detail::require(period <= 2520, "default_quotient_period: period too large");
  return static_cast<int>(period);
}

inline Scenario parse_scenario(const nlohmann::json& j) {
  using scenario_detail::json;
  Scenario sc;
  sc.name = j.value("name", "scenario");
  sc.experiment = j.value("experiment", "episode");

  if (sc.experiment == "figure1") {
    sc.figure1 = scenario_detail::parse_figure1(j.value("figure1", json::object()));
    // The game itself is assembled per seed at run time.
    sc.run.steps = sc.figure1->steps;
  } else {
    detail::require(j.contains("game"), "scenario: missing game");
    sc.game = scenario_detail::parse_game(j.at("game"));
  }

  if (j.contains("controller")) {
    const json& jc = j.at("controller");
    sc.controller.kind = jc.value("kind", "hba");
    if (jc.contains("posterior"))
      sc.controller.posterior =
          parse_likelihood_kind(jc.at("posterior").get<std::string>());
    sc.controller.plan.gamma = jc.value("gamma", 1.0);
    sc.controller.plan.horizon = jc.value("horizon", 1);
    sc.controller.plan.validate();
  }
  if (j.contains("run")) {
    const json& jr = j.at("run");
    sc.run.steps = jr.value("steps", sc.run.steps);
    if (jr.contains("seeds"))
      sc.run.seeds = jr.at("seeds").get<std::vector<std::uint64_t>>();
  }
  detail::require(!sc.run.seeds.empty(), "scenario: seeds must be explicit");
  if (j.contains("verify")) {
    const json& jv = j.at("verify");
    sc.verify.quotient_period = jv.value("quotient_period", 0);
    sc.verify.t_max = jv.value("t_max", 50);
  }
  sc.tracked_player = j.value("tracked_player", -1);
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), "cannot open scenario file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return parse_scenario(j);
}

inline std::unique_ptr<Controller> make_controller(const Scenario& sc,
                                                   const GameSpec& spec) {
  if (sc.controller.kind == "uniform")
    return std::make_unique<UniformController>(
        spec.num_actions(spec.controlled_player));
  if (sc.controller.kind == "oracle")
    return std::make_unique<OracleController>(spec, sc.controller.plan);
  detail::require(sc.controller.kind == "hba",
                  "scenario: unknown controller kind '" + sc.controller.kind + "'");
  return std::make_unique<HbaController>(spec, sc.controller.posterior,
                                         sc.controller.plan);
}

// Chain construction options derived from a verify scenario.
inline ChainBuildOptions chain_options(const Scenario& sc, ProcessKind process) {
  ChainBuildOptions opt;
  opt.process = process;
  opt.posterior = sc.controller.posterior;
  opt.plan = sc.controller.plan;
  opt.quotient.period = sc.verify.quotient_period > 0
                            ? sc.verify.quotient_period
                            : default_quotient_period(sc.game);
  return opt;
}

}  // namespace hba
