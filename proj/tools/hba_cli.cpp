// Command-line front end: scenario simulation, the canonical example
// fixtures, the long-run posterior experiment, chain verification, and
// plot-data extraction. Every command takes explicit seeds and writes
// byte-stable output.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hba/hba.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  hba::detail::require(out.good(), "cannot open output file: " + path.string());
  return out;
}

ordered_json reach_json(const hba::ReachResult& r) {
  ordered_json j;
  j["query"] = r.t ? ("F<=" + std::to_string(*r.t)) : "F<inf";
  if (r.t) j["t"] = *r.t;
  j["p"] = r.threshold;
  j["comparator"] = hba::to_string(r.comparator);
  j["probability"] = r.initial_prob;
  j["verdict"] = r.verdict;
  return j;
}

ordered_json blocks_json(const hba::Partition& part, const hba::ProcessChain& x,
                         const hba::ProcessChain& y) {
  ordered_json blocks = ordered_json::array();
  for (const std::vector<int>& block : part.blocks) {
    ordered_json b = ordered_json::array();
    for (int k : block) {
      if (k < x.num_nodes())
        b.push_back("X:" + x.node(k).name);
      else
        b.push_back("Y:" + y.node(k - x.num_nodes()).name);
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

ordered_json critical_json(const hba::ProcessChain& y, const hba::CriticalReport& rep) {
  ordered_json j;
  j["critical"] = rep.critical;
  ordered_json witness = ordered_json::array();
  for (int k : rep.witness) witness.push_back(y.node(k).name);
  j["witness"] = std::move(witness);
  ordered_json cands = ordered_json::array();
  for (const hba::CriticalCandidate& c : rep.candidates) {
    ordered_json jc;
    ordered_json nodes = ordered_json::array();
    for (int k : c.nodes) nodes.push_back(y.node(k).name);
    jc["nodes"] = std::move(nodes);
    jc["cond1_positive_payoffs"] = c.cond1;
    jc["cond2_reachable"] = c.cond2;
    jc["cond3_closed"] = c.cond3;
    cands.push_back(std::move(jc));
  }
  j["candidates"] = std::move(cands);
  return j;
}

ordered_json premises_json(const hba::ProcessChain& y, const hba::PremiseReport& rep) {
  auto names = [&](const std::vector<int>& ks) {
    ordered_json arr = ordered_json::array();
    for (int k : ks) arr.push_back(y.node(k).name);
    return arr;
  };
  ordered_json j;
  j["positive_payoff"] = {{"holds", rep.eq_positive_payoff},
                          {"violations", names(rep.positive_payoff_violations)}};
  j["state_inclusion"] = {{"holds", rep.eq_state_inclusion},
                          {"violations", names(rep.state_inclusion_violations)}};
  j["action_inclusion"] = {{"holds", rep.eq_action_inclusion},
                           {"violations", names(rep.action_inclusion_violations)}};
  j["critical"] = rep.critical;
  j["certified"] = {{"property1", rep.property1_certified},
                    {"property2", rep.property2_certified},
                    {"property3", rep.property3_certified}};
  if (rep.p_min) j["p_min"] = *rep.p_min;
  if (rep.p_max) j["p_max"] = *rep.p_max;
  return j;
}

hba::ProcessChain load_chain_file(const std::string& path, const std::string& tag) {
  std::ifstream in(path);
  hba::detail::require(in.good(), "cannot open chain file: " + path);
  return hba::read_chain(in, tag);
}

void print_example_report(const hba::ExampleReport& rep) {
  std::cout << "example " << rep.name << " posterior=" << hba::to_string(rep.posterior)
            << " steps=" << rep.steps << " seed=" << rep.seed << "\n";
  for (const hba::ExampleCheck& c : rep.checks) {
    std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.description
              << " -- " << c.detail << "\n";
  }
  if (!rep.pass() && !rep.trace_excerpt.empty())
    std::cout << "trace excerpt:\n" << rep.trace_excerpt;
}

int run_simulate(const std::string& scenario_path, std::uint64_t seed, bool has_seed,
                 const std::string& out_dir, double gamma, int horizon,
                 bool trace_plan) {
  hba::Scenario sc = hba::load_scenario_file(scenario_path);
  if (gamma >= 0.0) sc.controller.plan.gamma = gamma;
  if (horizon > 0) sc.controller.plan.horizon = horizon;
  sc.controller.plan.validate();

  std::vector<std::uint64_t> seeds = has_seed ? std::vector<std::uint64_t>{seed}
                                              : sc.run.seeds;
  fs::create_directories(out_dir);

  if (sc.experiment == "figure1") {
    for (std::uint64_t s : seeds) {
      hba::TraceResult trace = hba::run_figure1(*sc.figure1, s);
      fs::path path = fs::path(out_dir) / ("figure1_seed" + std::to_string(s) + ".csv");
      std::ofstream out = open_out(path);
      hba::write_trace_csv(out, trace);
      std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
  }

  if (sc.experiment == "verify") {
    hba::ChainBuildOptions yopt = hba::chain_options(sc, hba::ProcessKind::user_y);
    hba::ChainBuildOptions xopt = hba::chain_options(sc, hba::ProcessKind::ideal_x);
    hba::ProcessChain y = hba::build_chain(sc.game, yopt);
    hba::ProcessChain x = hba::build_chain(sc.game, xopt);
    ordered_json j;
    j["scenario"] = sc.name;
    hba::BisimResult bis = hba::bisimulation_partition(x, y);
    hba::Property4Report p4 = hba::verify_property4(x, y, sc.verify.t_max);
    j["bisimilar"] = bis.bisimilar;
    j["property4"] = {{"t_max", p4.t_max},
                      {"max_abs_diff", p4.max_abs_diff},
                      {"holds", p4.holds}};
    j["critical"] = critical_json(y, hba::detect_critical(y));
    j["premises"] = premises_json(y, hba::check_theorem_premises(x, y));
    std::cout << j.dump(2) << "\n";
    fs::path xpath = fs::path(out_dir) / (sc.name + "_X.chain");
    fs::path ypath = fs::path(out_dir) / (sc.name + "_Y.chain");
    std::ofstream xout = open_out(xpath);
    hba::write_chain(xout, x);
    std::ofstream yout = open_out(ypath);
    hba::write_chain(yout, y);
    std::cout << "wrote " << xpath.string() << "\n";
    std::cout << "wrote " << ypath.string() << "\n";
    return 0;
  }

  for (std::uint64_t s : seeds) {
    auto controller = hba::make_controller(sc, sc.game);
    hba::Rng rng(s);
    std::string stem = sc.name + "_seed" + std::to_string(s);

    if (sc.experiment == "posterior-trace") {
      hba::TraceResult trace =
          hba::run_posterior_trace(sc.game, *controller, sc.controller.posterior,
                                   sc.tracked_or_default(), sc.run.steps, rng);
      fs::path tpath = fs::path(out_dir) / (stem + "_trace.csv");
      std::ofstream tout = open_out(tpath);
      hba::write_trace_csv(tout, trace);
      fs::path epath = fs::path(out_dir) / (stem + "_episode.csv");
      std::ofstream eout = open_out(epath);
      hba::write_episode_csv(eout, sc.game, trace.log);
      std::cout << "wrote " << tpath.string() << "\n";
      std::cout << "wrote " << epath.string() << "\n";
      continue;
    }

    // Plain episode run.
    std::ofstream plan_out;
    std::function<void(const hba::EpisodeStep&)> observer;
    auto* hba_controller = dynamic_cast<hba::HbaController*>(controller.get());
    if (trace_plan && hba_controller) {
      fs::path ppath = fs::path(out_dir) / (stem + "_plan.csv");
      plan_out = open_out(ppath);
      hba::write_plan_header(plan_out);
      observer = [&](const hba::EpisodeStep& step) {
        hba::write_plan_rows(plan_out, sc.game, step.t,
                             hba_controller->last_plan().values,
                             hba_controller->last_plan().argmax);
      };
      std::cout << "writing " << ppath.string() << "\n";
    }
    hba::EpisodeLog log =
        hba::run_episode(sc.game, *controller, sc.run.steps, rng, observer);
    fs::path epath = fs::path(out_dir) / (stem + "_episode.csv");
    std::ofstream eout = open_out(epath);
    hba::write_episode_csv(eout, sc.game, log);
    std::cout << "wrote " << epath.string() << " steps=" << log.steps.size()
              << " terminal=" << (log.reached_terminal ? 1 : 0) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harsanyi-Bellman ad hoc coordination: simulator and verifier"};
  app.require_subcommand(1);

  // simulate
  std::string scenario_path, out_dir = ".";
  std::uint64_t seed = 0;
  double gamma = -1.0;
  int horizon = 0;
  bool trace_plan = false;
  CLI::App* sim = app.add_subcommand("simulate", "run a scenario file");
  sim->add_option("scenario", scenario_path, "scenario JSON file")->required();
  CLI::Option* sim_seed = sim->add_option("--seed", seed, "override the scenario seeds");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--gamma", gamma, "override the planner discount");
  sim->add_option("--horizon", horizon, "override the planner horizon");
  sim->add_flag("--trace-plan", trace_plan, "dump per-step expected payoffs");

  // example
  std::string example_name, posterior = "sum";
  int steps = 0;
  std::uint64_t ex_seed = 1;
  CLI::App* ex = app.add_subcommand("example", "run a canonical fixture (ex1..ex6)");
  ex->add_option("name", example_name, "ex1..ex6")->required();
  ex->add_option("--posterior", posterior, "product|sum|correlated");
  ex->add_option("--steps", steps, "override the fixture step count");
  ex->add_option("--seed", ex_seed, "random seed");

  // figure1
  std::uint64_t fig_seed = 1;
  int fig_steps = 3000;
  std::string fig_out = ".";
  CLI::App* fig = app.add_subcommand("figure1", "long-run sum-posterior experiment");
  fig->add_option("--seed", fig_seed, "random seed");
  fig->add_option("--steps", fig_steps, "run length");
  fig->add_option("--out", fig_out, "output directory");

  // verify
  CLI::App* verify = app.add_subcommand("verify", "model-check induced chains");
  verify->require_subcommand(1);

  std::string chain_a, chain_b;
  double tol = hba::kChainTol;
  int t_max = 50;
  CLI::App* bisim = verify->add_subcommand("bisim", "probabilistic bisimulation");
  bisim->add_option("x", chain_a, "first chain file")->required();
  bisim->add_option("y", chain_b, "second chain file")->required();
  bisim->add_option("--tol", tol, "probability comparison tolerance (0 = exact)");
  bisim->add_option("--t-max", t_max, "horizon for the bounded-reach comparison");

  std::string chain_path;
  int reach_t = -1;
  double reach_p = 0.0;
  std::string cmp = "ge";
  CLI::App* reach = verify->add_subcommand("reach", "PCTL reachability of term");
  reach->add_option("chain", chain_path, "chain file")->required();
  reach->add_option("--t", reach_t, "bounded horizon (omit for unbounded)");
  reach->add_option("--p", reach_p, "probability threshold")->required();
  reach->add_option("--cmp", cmp, "gt|ge");

  std::string verify_scenario, verify_out = ".";
  CLI::App* crit = verify->add_subcommand("critical", "criticality of the user types");
  crit->add_option("scenario", verify_scenario, "verify scenario JSON")->required();

  CLI::App* prem = verify->add_subcommand("premises", "termination guarantee premises");
  prem->add_option("scenario", verify_scenario, "verify scenario JSON")->required();

  CLI::App* chains = verify->add_subcommand("chains", "export the induced X/Y chains");
  chains->add_option("scenario", verify_scenario, "verify scenario JSON")->required();
  chains->add_option("--out", verify_out, "output directory");

  // plot-data
  std::string trace_path, plot_out;
  int stride = 1;
  CLI::App* plot = app.add_subcommand("plot-data", "downsample a trace for plotting");
  plot->add_option("trace", trace_path, "trace CSV file")->required();
  plot->add_option("--stride", stride, "keep every stride-th row");
  plot->add_option("--out", plot_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return run_simulate(scenario_path, seed, sim_seed->count() > 0, out_dir, gamma,
                          horizon, trace_plan);

    if (ex->parsed()) {
      hba::ExampleReport rep = hba::run_example(
          example_name, hba::parse_likelihood_kind(posterior), steps, ex_seed);
      print_example_report(rep);
      return rep.pass() ? 0 : 1;
    }

    if (fig->parsed()) {
      hba::Figure1Params params;
      params.steps = fig_steps;
      hba::TraceResult trace = hba::run_figure1(params, fig_seed);
      fs::create_directories(fig_out);
      fs::path path =
          fs::path(fig_out) / ("figure1_seed" + std::to_string(fig_seed) + ".csv");
      std::ofstream out = open_out(path);
      hba::write_trace_csv(out, trace);
      std::cout << "wrote " << path.string() << "\n";
      return 0;
    }

    if (bisim->parsed()) {
      hba::ProcessChain x = load_chain_file(chain_a, "X");
      hba::ProcessChain y = load_chain_file(chain_b, "Y");
      hba::BisimResult res = hba::bisimulation_partition(x, y, tol);
      hba::Property4Report p4 = hba::verify_property4(x, y, t_max);
      ordered_json j;
      j["bisimilar"] = res.bisimilar;
      j["iterations"] = res.partition.iterations;
      j["blocks"] = blocks_json(res.partition, x, y);
      j["property4"] = {{"t_max", p4.t_max},
                        {"max_abs_diff", p4.max_abs_diff},
                        {"first_mismatch_t", p4.first_mismatch_t},
                        {"holds", p4.holds}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (reach->parsed()) {
      hba::ProcessChain chain = load_chain_file(chain_path, "");
      hba::Comparator comparator =
          cmp == "gt" ? hba::Comparator::greater : hba::Comparator::greater_equal;
      hba::ReachResult res =
          reach_t >= 0 ? hba::check_bounded_reach(chain, reach_t, reach_p, comparator)
                       : hba::check_unbounded_reach(chain, reach_p, comparator);
      std::cout << reach_json(res).dump(2) << "\n";
      return 0;
    }

    if (crit->parsed() || prem->parsed() || chains->parsed()) {
      hba::Scenario sc = hba::load_scenario_file(verify_scenario);
      hba::ProcessChain y =
          hba::build_chain(sc.game, hba::chain_options(sc, hba::ProcessKind::user_y));
      if (crit->parsed()) {
        ordered_json j = critical_json(y, hba::detect_critical(y));
        j["scenario"] = sc.name;
        std::cout << j.dump(2) << "\n";
        return 0;
      }
      hba::ProcessChain x =
          hba::build_chain(sc.game, hba::chain_options(sc, hba::ProcessKind::ideal_x));
      if (prem->parsed()) {
        ordered_json j = premises_json(y, hba::check_theorem_premises(x, y));
        j["scenario"] = sc.name;
        std::cout << j.dump(2) << "\n";
        return 0;
      }
      fs::create_directories(verify_out);
      fs::path xpath = fs::path(verify_out) / (sc.name + "_X.chain");
      fs::path ypath = fs::path(verify_out) / (sc.name + "_Y.chain");
      std::ofstream xout = open_out(xpath);
      hba::write_chain(xout, x);
      std::ofstream yout = open_out(ypath);
      hba::write_chain(yout, y);
      std::cout << "wrote " << xpath.string() << "\n";
      std::cout << "wrote " << ypath.string() << "\n";
      return 0;
    }

    if (plot->parsed()) {
      std::ifstream in(trace_path);
      hba::detail::require(in.good(), "cannot open trace file: " + trace_path);
      if (plot_out.empty()) {
        hba::emit_plot_data(in, std::cout, stride);
      } else {
        std::ofstream out = open_out(plot_out);
        hba::emit_plot_data(in, out, stride);
        std::cout << "wrote " << plot_out << "\n";
      }
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
