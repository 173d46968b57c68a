#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hba/chain.hpp"
#include "hba/common.hpp"

namespace hba {

namespace graph_detail {

// Nodes reachable from the initial node along positive-probability edges.
inline std::vector<char> reachable_from_initial(const ProcessChain& chain) {
  std::vector<char> seen(chain.num_nodes(), 0);
  std::vector<int> stack{chain.initial()};
  seen[chain.initial()] = 1;
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    for (const auto& [dst, p] : chain.edges(k)) {
      if (p > 0.0 && !seen[dst]) {
        seen[dst] = 1;
        stack.push_back(dst);
      }
    }
  }
  return seen;
}

// Strongly connected components (iterative Tarjan), restricted to a node
// mask. Returns component index per node (-1 outside the mask).
inline std::vector<int> strongly_connected_components(const ProcessChain& chain,
                                                      const std::vector<char>& mask,
                                                      int& num_components) {
  int n = chain.num_nodes();
  std::vector<int> comp(n, -1), low(n, 0), disc(n, -1), stack_frame(n, 0);
  std::vector<int> scc_stack;
  std::vector<char> on_stack(n, 0);
  int timer = 0;
  num_components = 0;

  for (int start = 0; start < n; ++start) {
    if (!mask[start] || disc[start] >= 0) continue;
    // Explicit DFS stack of (node, next edge index).
    std::vector<std::pair<int, std::size_t>> dfs{{start, 0}};
    disc[start] = low[start] = timer++;
    scc_stack.push_back(start);
    on_stack[start] = 1;
    while (!dfs.empty()) {
      auto& [u, edge_idx] = dfs.back();
      if (edge_idx < chain.edges(u).size()) {
        auto [v, p] = chain.edges(u)[edge_idx++];
        if (p <= 0.0 || !mask[v]) continue;
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          scc_stack.push_back(v);
          on_stack[v] = 1;
          dfs.emplace_back(v, 0);
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], disc[v]);
        }
      } else {
        if (low[u] == disc[u]) {
          while (true) {
            int w = scc_stack.back();
            scc_stack.pop_back();
            on_stack[w] = 0;
            comp[w] = num_components;
            if (w == u) break;
          }
          ++num_components;
        }
        int u_done = u;
        dfs.pop_back();
        if (!dfs.empty())
          low[dfs.back().first] = std::min(low[dfs.back().first], low[u_done]);
      }
    }
  }
  return comp;
}

}  // namespace graph_detail

// One closed recurrent candidate region and which of the three criticality
// conditions it satisfies: (1) every member has some action with positive
// expected payoff under both the chain's own beliefs and oracle knowledge,
// (2) the region is reachable from the initial node, (3) once entered it is
// never left.
struct CriticalCandidate {
  std::vector<int> nodes;
  bool cond1 = false;
  bool cond2 = false;
  bool cond3 = false;

  bool all() const { return cond1 && cond2 && cond3; }
};

struct CriticalReport {
  bool critical = false;
  std::vector<int> witness;  // nonempty iff critical
  std::vector<CriticalCandidate> candidates;
};

// Detects critical user type spaces on the user-process chain. Closed
// recurrent non-terminal regions are exactly the bottom strongly connected
// components without a term node, restricted to the reachable part; the
// type spaces are critical iff some such component also passes the
// positive-payoff condition at every node.
inline CriticalReport detect_critical(const ProcessChain& y) {
  for (int k = 0; k < y.num_nodes(); ++k)
    if (!y.node(k).term)
      detail::require(!y.node(k).e_self.empty() && !y.node(k).e_oracle.empty(),
                      "detect_critical: chain lacks payoff annotations "
                      "(build it from a game with a pure type distribution)");

  CriticalReport report;
  std::vector<char> reach = graph_detail::reachable_from_initial(y);
  int num_comp = 0;
  std::vector<int> comp =
      graph_detail::strongly_connected_components(y, reach, num_comp);

  std::vector<std::vector<int>> members(num_comp);
  std::vector<char> bottom(num_comp, 1), has_term(num_comp, 0);
  for (int k = 0; k < y.num_nodes(); ++k) {
    if (comp[k] < 0) continue;
    members[comp[k]].push_back(k);
    if (y.node(k).term) has_term[comp[k]] = 1;
    for (const auto& [dst, p] : y.edges(k))
      if (p > 0.0 && comp[dst] != comp[k]) bottom[comp[k]] = 0;
  }

  for (int c = 0; c < num_comp; ++c) {
    if (!bottom[c] || has_term[c]) continue;
    CriticalCandidate cand;
    cand.nodes = members[c];
    cand.cond2 = true;  // restricted to the reachable part
    cand.cond3 = true;  // bottom component: closed by construction
    cand.cond1 = true;
    for (int k : cand.nodes) {
      const ChainNode& node = y.node(k);
      bool some_action = false;
      for (std::size_t a = 0; a < node.e_self.size(); ++a) {
        if (node.e_self[a] > 0.0 && node.e_oracle[a] > 0.0) {
          some_action = true;
          break;
        }
      }
      if (!some_action) {
        cand.cond1 = false;
        break;
      }
    }
    if (cand.all() && report.witness.empty()) {
      report.critical = true;
      report.witness = cand.nodes;
    }
    report.candidates.push_back(std::move(cand));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Premises of the three indefinite termination guarantees, checked per
// user-process node, plus the certified properties.
// ---------------------------------------------------------------------------

struct PremiseReport {
  // Premise of guarantee 1: every action the user process may choose has
  // positive oracle expected payoff.
  bool eq_positive_payoff = true;
  std::vector<int> positive_payoff_violations;

  // Premise of guarantee 2: every state the user process may move to, the
  // ideal process may move to as well.
  bool eq_state_inclusion = true;
  std::vector<int> state_inclusion_violations;

  // Premise of guarantee 3: the user maximiser set is contained in the
  // oracle maximiser set.
  bool eq_action_inclusion = true;
  std::vector<int> action_inclusion_violations;

  bool critical = false;

  bool property1_certified = false;
  bool property2_certified = false;
  bool property3_certified = false;

  // gamma < 1 bound from the min/max success-rate selections of the ideal
  // process (present when the ideal chain carries action annotations).
  std::optional<double> p_min;
  std::optional<double> p_max;
};

namespace critical_detail {

// Reach probability of the chain variant where each non-term node plays one
// fixed action from its maximiser set instead of the uniform mixture.
inline double selection_reach(const ProcessChain& base,
                              const std::vector<ActionId>& selection) {
  ProcessChain variant(base.tag());
  for (int k = 0; k < base.num_nodes(); ++k) {
    ChainNode node;
    node.name = base.node(k).name;
    node.term = base.node(k).term;
    variant.add_node(std::move(node));
  }
  variant.set_initial(base.initial());
  for (int k = 0; k < base.num_nodes(); ++k) {
    if (base.node(k).term) {
      variant.add_edge(k, k, 1.0);
      continue;
    }
    for (const auto& [dst, p] : base.node(k).succ_nodes_by_action[selection[k]])
      variant.add_edge(k, dst, p);
  }
  return unbounded_reach_vector(variant)[variant.initial()];
}

}  // namespace critical_detail

// The processes that at every node pick the maximiser-set action with the
// lowest / highest success rate. Returns their termination probabilities.
inline std::pair<double, double> min_max_selection_reach(const ProcessChain& x) {
  std::vector<double> p_inf = unbounded_reach_vector(x);
  std::vector<ActionId> sel_min(x.num_nodes(), 0), sel_max(x.num_nodes(), 0);
  for (int k = 0; k < x.num_nodes(); ++k) {
    const ChainNode& node = x.node(k);
    if (node.term) continue;
    detail::require(!node.succ_nodes_by_action.empty() && !node.argmax_self.empty(),
                    "min_max_selection_reach: chain lacks action annotations");
    auto rate = [&](ActionId a) {
      double r = 0.0;
      for (const auto& [dst, q] : node.succ_nodes_by_action[a]) r += q * p_inf[dst];
      return r;
    };
    ActionId best_min = node.argmax_self.front();
    ActionId best_max = node.argmax_self.front();
    for (ActionId a : node.argmax_self) {
      if (rate(a) < rate(best_min)) best_min = a;
      if (rate(a) > rate(best_max)) best_max = a;
    }
    sel_min[k] = best_min;
    sel_max[k] = best_max;
  }
  return {critical_detail::selection_reach(x, sel_min),
          critical_detail::selection_reach(x, sel_max)};
}

// Checks the premises of the termination guarantees over every annotated
// user-process node, runs criticality detection, and reports which
// guarantees are certified. Both chains must come from the same game.
inline PremiseReport check_theorem_premises(const ProcessChain& x,
                                            const ProcessChain& y) {
  PremiseReport rep;
  for (int k = 0; k < y.num_nodes(); ++k) {
    const ChainNode& node = y.node(k);
    if (node.term) continue;
    detail::require(!node.e_self.empty() && !node.e_oracle.empty(),
                    "check_theorem_premises: user chain lacks oracle annotations");

    for (ActionId a : node.argmax_self) {
      if (node.e_oracle[a] <= 0.0) {
        rep.eq_positive_payoff = false;
        rep.positive_payoff_violations.push_back(k);
        break;
      }
    }

    // States the processes may move into from this class.
    auto support = [&](const std::vector<ActionId>& actions) {
      std::set<StateId> states;
      for (ActionId a : actions)
        for (const auto& [s, p] : node.succ_states_by_action[a])
          if (p > 0.0) states.insert(s);
      return states;
    };
    std::set<StateId> y_states = support(node.argmax_self);
    std::set<StateId> x_states = support(node.argmax_oracle);
    if (!std::includes(x_states.begin(), x_states.end(), y_states.begin(),
                       y_states.end())) {
      rep.eq_state_inclusion = false;
      rep.state_inclusion_violations.push_back(k);
    }

    if (!std::includes(node.argmax_oracle.begin(), node.argmax_oracle.end(),
                       node.argmax_self.begin(), node.argmax_self.end())) {
      rep.eq_action_inclusion = false;
      rep.action_inclusion_violations.push_back(k);
    }
  }

  rep.critical = detect_critical(y).critical;
  rep.property1_certified = rep.eq_positive_payoff && !rep.critical;
  rep.property2_certified = rep.eq_state_inclusion && !rep.critical;
  rep.property3_certified = rep.eq_action_inclusion && !rep.critical;

  bool x_annotated = true;
  for (int k = 0; k < x.num_nodes(); ++k)
    if (!x.node(k).term &&
        (x.node(k).succ_nodes_by_action.empty() || x.node(k).argmax_self.empty()))
      x_annotated = false;
  if (x_annotated) {
    auto [pmin, pmax] = min_max_selection_reach(x);
    rep.p_min = pmin;
    rep.p_max = pmax;
  }
  return rep;
}

}  // namespace hba
