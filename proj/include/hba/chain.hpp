#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hba/common.hpp"

namespace hba {

// One quotient state of an induced process: a game state together with
// whatever strategy/controller memory the quotient map tracks. Nodes built
// from a game carry planner annotations; nodes loaded from an edge-list file
// carry only the graph.
struct ChainNode {
  std::string name;
  StateId game_state = -1;
  bool term = false;

  // Expected payoff per controlled action under the chain's own controller
  // beliefs, and under oracle (true type) knowledge at the same history.
  std::vector<double> e_self;
  std::vector<double> e_oracle;
  std::vector<ActionId> argmax_self;
  std::vector<ActionId> argmax_oracle;

  // True-dynamics successor distributions when the controller fixes one
  // action: over game states and over chain nodes.
  std::vector<std::vector<std::pair<StateId, double>>> succ_states_by_action;
  std::vector<std::vector<std::pair<int, double>>> succ_nodes_by_action;
};

// A finite labelled Markov chain induced by a controller in a game (the X or
// Y process). Terminal nodes are absorbing: they self-loop with probability
// one and carry the term label. Immutable once built; all verifier
// operations are pure functions of it.
class ProcessChain {
 public:
  ProcessChain() = default;
  explicit ProcessChain(std::string tag) : tag_(std::move(tag)) {}

  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  int add_node(ChainNode node) {
    nodes_.push_back(std::move(node));
    edges_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
  }

  void add_edge(int src, int dst, double prob) {
    for (auto& [d, p] : edges_[src]) {
      if (d == dst) {
        p += prob;
        return;
      }
    }
    edges_[src].emplace_back(dst, prob);
  }

  void set_initial(int node) { initial_ = node; }
  int initial() const { return initial_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const ChainNode& node(int k) const { return nodes_[k]; }
  ChainNode& node(int k) { return nodes_[k]; }
  const std::vector<std::pair<int, double>>& edges(int k) const { return edges_[k]; }

  std::optional<int> find_node(const std::string& name) const {
    for (int k = 0; k < num_nodes(); ++k)
      if (nodes_[k].name == name) return k;
    return std::nullopt;
  }

  // Checks row sums and terminal self-loops.
  void validate(double tol = kChainTol) const {
    detail::require(num_nodes() > 0, "ProcessChain: empty");
    for (int k = 0; k < num_nodes(); ++k) {
      double sum = 0.0;
      for (const auto& [dst, p] : edges_[k]) {
        detail::require(dst >= 0 && dst < num_nodes(), "ProcessChain: bad edge target");
        detail::require(p >= 0.0, "ProcessChain: negative edge probability");
        sum += p;
      }
      detail::require(std::abs(sum - 1.0) <= tol,
                      "ProcessChain: outgoing mass of node '" + nodes_[k].name +
                          "' is not 1");
      if (nodes_[k].term) {
        detail::require(edges_[k].size() == 1 && edges_[k][0].first == k &&
                            std::abs(edges_[k][0].second - 1.0) <= tol,
                        "ProcessChain: term node '" + nodes_[k].name +
                            "' must self-loop with probability 1");
      }
    }
  }

 private:
  std::string tag_;
  std::vector<ChainNode> nodes_;
  std::vector<std::vector<std::pair<int, double>>> edges_;
  int initial_ = 0;
};

// ---------------------------------------------------------------------------
// PCTL bounded / unbounded reachability of term.
// ---------------------------------------------------------------------------

// p_k(s) by dynamic programming: 1 on term nodes, else the one-step mixture
// of p_{k-1}. Monotone and non-decreasing in k.
inline std::vector<double> bounded_reach_vector(const ProcessChain& chain, int t) {
  std::vector<double> p(chain.num_nodes(), 0.0);
  for (int k = 0; k < chain.num_nodes(); ++k)
    if (chain.node(k).term) p[k] = 1.0;
  for (int step = 0; step < t; ++step) {
    std::vector<double> next(chain.num_nodes(), 0.0);
    for (int k = 0; k < chain.num_nodes(); ++k) {
      if (chain.node(k).term) {
        next[k] = 1.0;
        continue;
      }
      double acc = 0.0;
      for (const auto& [dst, q] : chain.edges(k)) acc += q * p[dst];
      next[k] = acc;
    }
    p = std::move(next);
  }
  return p;
}

// Least fixpoint of reachability. Qualitative precomputation first, so the
// answer is exactly 0 on nodes with no path to term and exactly 1 on nodes
// that cannot escape into the zero set; value iteration to absolute
// tolerance covers the rest.
inline std::vector<double> unbounded_reach_vector(const ProcessChain& chain,
                                                  double tol = 1e-12) {
  int n = chain.num_nodes();
  std::vector<std::vector<int>> rev(n);
  for (int k = 0; k < n; ++k)
    for (const auto& [dst, p] : chain.edges(k))
      if (p > 0.0) rev[dst].push_back(k);

  // prob0: no path to a term node.
  std::vector<char> can_reach(n, 0);
  {
    std::vector<int> stack;
    for (int k = 0; k < n; ++k)
      if (chain.node(k).term) {
        can_reach[k] = 1;
        stack.push_back(k);
      }
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      for (int src : rev[k])
        if (!can_reach[src]) {
          can_reach[src] = 1;
          stack.push_back(src);
        }
    }
  }

  // prob1: no path into the prob0 set (in a finite chain the run settles in
  // some closed recurrent set, so avoiding prob0 forces termination).
  std::vector<char> reaches_zero(n, 0);
  {
    std::vector<int> stack;
    for (int k = 0; k < n; ++k)
      if (!can_reach[k]) {
        reaches_zero[k] = 1;
        stack.push_back(k);
      }
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      for (int src : rev[k])
        if (!reaches_zero[src]) {
          reaches_zero[src] = 1;
          stack.push_back(src);
        }
    }
  }

  std::vector<double> p(n, 0.0);
  bool any_interior = false;
  for (int k = 0; k < n; ++k) {
    if (chain.node(k).term || !reaches_zero[k])
      p[k] = 1.0;
    else if (can_reach[k])
      any_interior = true;
  }
  if (!any_interior) return p;

  // Geometric convergence on the interior; the iteration cap only guards
  // against pathological inputs.
  for (long iter = 0; iter < 2000000; ++iter) {
    double delta = 0.0;
    std::vector<double> next = p;
    for (int k = 0; k < n; ++k) {
      if (chain.node(k).term || !can_reach[k] || !reaches_zero[k]) continue;
      double acc = 0.0;
      for (const auto& [dst, q] : chain.edges(k)) acc += q * p[dst];
      next[k] = acc;
      delta = std::max(delta, std::abs(acc - p[k]));
    }
    p = std::move(next);
    if (delta <= tol) break;
  }
  return p;
}

enum class Comparator { greater, greater_equal };

inline const char* to_string(Comparator c) {
  return c == Comparator::greater ? ">" : ">=";
}

inline bool compare(Comparator c, double lhs, double rhs) {
  return c == Comparator::greater ? lhs > rhs : lhs >= rhs;
}

// Verdict for F^{<=t}_{~p} term or F^{<inf}_{~p} term at the initial node.
struct ReachResult {
  std::optional<int> t;  // empty for the unbounded query
  double threshold = 0.0;
  Comparator comparator = Comparator::greater_equal;
  std::vector<double> probs;  // per node
  double initial_prob = 0.0;
  bool verdict = false;
};

inline ReachResult check_bounded_reach(const ProcessChain& chain, int t, double p,
                                       Comparator cmp) {
  detail::require(t >= 0, "check_bounded_reach: t must be >= 0");
  ReachResult out;
  out.t = t;
  out.threshold = p;
  out.comparator = cmp;
  out.probs = bounded_reach_vector(chain, t);
  out.initial_prob = out.probs[chain.initial()];
  out.verdict = compare(cmp, out.initial_prob, p);
  return out;
}

inline ReachResult check_unbounded_reach(const ProcessChain& chain, double p,
                                         Comparator cmp) {
  ReachResult out;
  out.threshold = p;
  out.comparator = cmp;
  out.probs = unbounded_reach_vector(chain);
  out.initial_prob = out.probs[chain.initial()];
  out.verdict = compare(cmp, out.initial_prob, p);
  return out;
}

// Success rate of one controlled action at a node: the probability that
// fixing this action now and following the chain afterwards eventually
// terminates (gamma = 1 semantics). Needs action-resolved annotations, which
// constructed chains carry.
inline double success_rate(const ProcessChain& chain, int node, ActionId action) {
  const ChainNode& nd = chain.node(node);
  if (nd.term) return 1.0;
  detail::require(!nd.succ_nodes_by_action.empty(),
                  "success_rate: chain has no action-resolved successors");
  std::vector<double> p = unbounded_reach_vector(chain);
  double r = 0.0;
  for (const auto& [dst, q] : nd.succ_nodes_by_action[action]) r += q * p[dst];
  return r;
}

// ---------------------------------------------------------------------------
// Edge-list file format: `src dst prob` lines plus initial/term declarations.
// Probabilities may be written as decimals or fractions (a/b).
// ---------------------------------------------------------------------------

inline double parse_probability(const std::string& token) {
  std::size_t slash = token.find('/');
  if (slash == std::string::npos) return std::stod(token);
  double num = std::stod(token.substr(0, slash));
  double den = std::stod(token.substr(slash + 1));
  detail::require(den != 0.0, "chain file: zero denominator");
  return num / den;
}

inline ProcessChain read_chain(std::istream& in, const std::string& tag = "") {
  ProcessChain chain(tag);
  std::map<std::string, int> index;
  auto intern = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    ChainNode node;
    node.name = name;
    int k = chain.add_node(std::move(node));
    index.emplace(name, k);
    return k;
  };

  std::string line;
  std::optional<std::string> initial_name;
  bool any_edge = false;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "initial") {
      std::string name;
      detail::require(static_cast<bool>(ls >> name), "chain file: initial needs a node");
      initial_name = name;
      intern(name);
    } else if (first == "term") {
      std::string name;
      while (ls >> name) chain.node(intern(name)).term = true;
    } else {
      std::string dst, prob;
      detail::require(static_cast<bool>(ls >> dst >> prob),
                      "chain file: expected 'src dst prob'");
      chain.add_edge(intern(first), intern(dst), parse_probability(prob));
      any_edge = true;
    }
  }
  detail::require(any_edge || chain.num_nodes() > 0, "chain file: empty");
  detail::require(initial_name.has_value(), "chain file: missing initial declaration");
  chain.set_initial(index.at(*initial_name));

  // Terminal nodes without explicit edges get their absorbing self-loop.
  for (int k = 0; k < chain.num_nodes(); ++k)
    if (chain.node(k).term && chain.edges(k).empty()) chain.add_edge(k, k, 1.0);
  chain.validate();
  return chain;
}

inline void write_chain(std::ostream& out, const ProcessChain& chain) {
  out << "initial " << chain.node(chain.initial()).name << "\n";
  for (int k = 0; k < chain.num_nodes(); ++k)
    if (chain.node(k).term) out << "term " << chain.node(k).name << "\n";
  char buf[64];
  for (int k = 0; k < chain.num_nodes(); ++k) {
    for (const auto& [dst, p] : chain.edges(k)) {
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out << chain.node(k).name << " " << chain.node(dst).name << " " << buf << "\n";
    }
  }
}

}  // namespace hba
