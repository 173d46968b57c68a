#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hba/chain.hpp"
#include "hba/common.hpp"

namespace hba {

// Equivalence classes over the disjoint union of two chains' node sets.
// Block ids are dense; node_block[k] maps a union-node index to its block.
// Union indexing: X nodes first, then Y nodes offset by X's node count.
struct Partition {
  std::vector<std::vector<int>> blocks;
  std::vector<int> node_block;
  int iterations = 0;

  int block_of(int union_node) const { return node_block[union_node]; }
};

struct BisimResult {
  Partition partition;
  bool bisimilar = false;
};

namespace bisim_detail {

struct UnionView {
  const ProcessChain* x;
  const ProcessChain* y;

  int size() const { return x->num_nodes() + y->num_nodes(); }
  bool term(int k) const {
    return k < x->num_nodes() ? x->node(k).term
                              : y->node(k - x->num_nodes()).term;
  }
  // Edges with targets renumbered into union indices.
  std::vector<std::pair<int, double>> edges(int k) const {
    if (k < x->num_nodes()) return x->edges(k);
    std::vector<std::pair<int, double>> out = y->edges(k - x->num_nodes());
    for (auto& [dst, p] : out) dst += x->num_nodes();
    return out;
  }
};

}  // namespace bisim_detail

// Coarsest probabilistic bisimulation by iterative refinement. Start from
// the {term, non-term} split, then split any block whose members disagree on
// the probability mass they send into some block, beyond tol. tol = 0 gives
// exact comparison, usable for hand-built chains whose probabilities are
// exactly representable.
inline BisimResult bisimulation_partition(const ProcessChain& x,
                                          const ProcessChain& y,
                                          double tol = kChainTol) {
  bisim_detail::UnionView view{&x, &y};
  int n = view.size();

  Partition part;
  part.node_block.assign(n, -1);
  {
    std::vector<int> terms, others;
    for (int k = 0; k < n; ++k) (view.term(k) ? terms : others).push_back(k);
    if (!others.empty()) part.blocks.push_back(others);
    if (!terms.empty()) part.blocks.push_back(terms);
    for (std::size_t b = 0; b < part.blocks.size(); ++b)
      for (int k : part.blocks[b]) part.node_block[k] = static_cast<int>(b);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    ++part.iterations;
    int num_blocks = static_cast<int>(part.blocks.size());

    // Signature of a node: mass sent into each current block.
    auto signature = [&](int k) {
      std::vector<double> sig(num_blocks, 0.0);
      for (const auto& [dst, p] : view.edges(k)) sig[part.node_block[dst]] += p;
      return sig;
    };
    auto close = [&](const std::vector<double>& a, const std::vector<double>& b) {
      for (int i = 0; i < num_blocks; ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
      return true;
    };

    std::vector<std::vector<int>> next_blocks;
    for (const std::vector<int>& block : part.blocks) {
      std::vector<std::vector<int>> groups;
      std::vector<std::vector<double>> reps;
      for (int k : block) {
        std::vector<double> sig = signature(k);
        bool placed = false;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          if (close(sig, reps[g])) {
            groups[g].push_back(k);
            placed = true;
            break;
          }
        }
        if (!placed) {
          groups.push_back({k});
          reps.push_back(std::move(sig));
        }
      }
      if (groups.size() > 1) changed = true;
      for (std::vector<int>& g : groups) next_blocks.push_back(std::move(g));
    }
    part.blocks = std::move(next_blocks);
    for (std::size_t b = 0; b < part.blocks.size(); ++b)
      for (int k : part.blocks[b]) part.node_block[k] = static_cast<int>(b);
  }

  BisimResult out;
  out.bisimilar = part.node_block[x.initial()] ==
                  part.node_block[x.num_nodes() + y.initial()];
  out.partition = std::move(part);
  return out;
}

// Numerical confirmation of the bisimulation consequence: bounded
// termination probabilities of the two chains agree at every horizon up to
// t_max. Reported alongside the partition verdict.
struct Property4Report {
  bool bisimilar = false;
  int t_max = 0;
  double max_abs_diff = 0.0;
  int first_mismatch_t = -1;  // -1 when all horizons agree within tol
  bool holds = false;
};

inline Property4Report verify_property4(const ProcessChain& x, const ProcessChain& y,
                                        int t_max, double tol = kChainTol) {
  Property4Report rep;
  rep.bisimilar = bisimulation_partition(x, y).bisimilar;
  rep.t_max = t_max;
  for (int t = 0; t <= t_max; ++t) {
    double px = bounded_reach_vector(x, t)[x.initial()];
    double py = bounded_reach_vector(y, t)[y.initial()];
    double diff = std::abs(px - py);
    rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
    if (diff > tol && rep.first_mismatch_t < 0) rep.first_mismatch_t = t;
  }
  rep.holds = rep.first_mismatch_t < 0;
  return rep;
}

}  // namespace hba
