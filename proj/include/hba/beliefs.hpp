#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "hba/common.hpp"
#include "hba/game.hpp"
#include "hba/history.hpp"
#include "hba/strategy.hpp"

namespace hba {

enum class LikelihoodKind { product, sum, correlated };

inline const char* to_string(LikelihoodKind k) {
  switch (k) {
    case LikelihoodKind::product: return "product";
    case LikelihoodKind::sum: return "sum";
    case LikelihoodKind::correlated: return "correlated";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Definitional likelihoods. These recompute from the full history and serve
// as the reference forms; BeliefState below is the incremental accumulator.
// ---------------------------------------------------------------------------

// Product likelihood: the probability the type assigns to the player's
// observed actions, multiplied over all steps. 1 on the empty history.
inline double product_likelihood(const History& h, const TypeStrategy& type,
                                 int upto = -1) {
  if (upto < 0) upto = h.length();
  double l = 1.0;
  for (int tau = 0; tau < upto; ++tau)
    l *= type.distribution(h, tau)[h.action(tau)[type.player()]];
  return l;
}

// Log-space form used for long histories: (log value, exact-zero flag).
struct LogLikelihood {
  double log_value = 0.0;
  bool zero = false;
};

inline LogLikelihood product_log_likelihood(const History& h,
                                            const TypeStrategy& type,
                                            int upto = -1) {
  if (upto < 0) upto = h.length();
  LogLikelihood out;
  for (int tau = 0; tau < upto; ++tau) {
    double p = type.distribution(h, tau)[h.action(tau)[type.player()]];
    if (p <= 0.0) {
      out.zero = true;
      return out;
    }
    out.log_value += std::log(p);
  }
  return out;
}

// Sum likelihood: the same per-step probabilities summed. 0 on the empty
// history.
inline double sum_likelihood(const History& h, const TypeStrategy& type,
                             int upto = -1) {
  if (upto < 0) upto = h.length();
  double l = 0.0;
  for (int tau = 0; tau < upto; ++tau)
    l += type.distribution(h, tau)[h.action(tau)[type.player()]];
  return l;
}

struct PlayerPosterior {
  std::vector<double> probs;
  bool degenerate = false;
};

// Bayes quotient over one player's user types. A zero denominator sets the
// degenerate flag and falls back to the prior so the caller can keep
// running while the event stays observable.
inline PlayerPosterior posterior_from_likelihoods(std::span<const double> likelihoods,
                                                  std::span<const double> prior) {
  detail::require(likelihoods.size() == prior.size(),
                  "posterior_from_likelihoods: size mismatch");
  PlayerPosterior out;
  out.probs.resize(prior.size());
  double denom = 0.0;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    out.probs[k] = likelihoods[k] * prior[k];
    denom += out.probs[k];
  }
  if (denom <= 0.0) {
    out.degenerate = true;
    out.probs.assign(prior.begin(), prior.end());
    return out;
  }
  for (double& p : out.probs) p /= denom;
  return out;
}

// Combined posterior: product of the per-player posteriors over the joint
// user type space, in other-player slot order.
inline std::vector<double> combined_posterior(
    const std::vector<std::vector<double>>& per_player) {
  std::vector<int> sizes;
  sizes.reserve(per_player.size());
  for (const auto& p : per_player) sizes.push_back(static_cast<int>(p.size()));
  ProfileIndexer idx(sizes);
  std::vector<double> table(idx.count());
  for (long long k = 0; k < idx.count(); ++k) {
    std::vector<int> profile = idx.unflatten(k);
    double p = 1.0;
    for (std::size_t j = 0; j < per_player.size(); ++j) p *= per_player[j][profile[j]];
    table[k] = p;
  }
  return table;
}

// Correlated likelihood table: for each joint profile of user types, the sum
// over steps of the product of per-player action probabilities. Learns
// correlated type distributions that per-player posteriors cannot represent.
inline std::vector<double> correlated_likelihoods(const GameSpec& spec,
                                                  const History& h, int upto = -1) {
  if (upto < 0) upto = h.length();
  ProfileIndexer idx = spec.user_joint_indexer();
  std::vector<double> like(idx.count(), 0.0);
  std::vector<PlayerId> others = spec.other_players();
  for (int tau = 0; tau < upto; ++tau) {
    // Per-step action probabilities, computed once per (player, type).
    std::vector<std::vector<double>> step(others.size());
    for (std::size_t slot = 0; slot < others.size(); ++slot) {
      PlayerId j = others[slot];
      ActionId aj = h.action(tau)[j];
      step[slot].resize(spec.user_types[j].size());
      for (std::size_t k = 0; k < spec.user_types[j].size(); ++k)
        step[slot][k] = spec.user_types[j][k]->distribution(h, tau)[aj];
    }
    for (long long k = 0; k < idx.count(); ++k) {
      std::vector<int> profile = idx.unflatten(k);
      double p = 1.0;
      for (std::size_t slot = 0; slot < others.size(); ++slot)
        p *= step[slot][profile[slot]];
      like[k] += p;
    }
  }
  return like;
}

struct JointPosterior {
  std::vector<double> probs;  // flattened over the user joint space
  bool degenerate = false;
};

inline JointPosterior correlated_posterior(const GameSpec& spec, const History& h,
                                           int upto = -1) {
  std::vector<double> prior = spec.effective_joint_prior();
  JointPosterior out;
  if (upto < 0) upto = h.length();
  if (upto == 0) {
    out.probs = prior;
    return out;
  }
  std::vector<double> like = correlated_likelihoods(spec, h, upto);
  double denom = 0.0;
  out.probs.resize(like.size());
  for (std::size_t k = 0; k < like.size(); ++k) {
    out.probs[k] = prior[k] * like[k];
    denom += out.probs[k];
  }
  if (denom <= 0.0) {
    out.degenerate = true;
    out.probs = prior;
    return out;
  }
  for (double& p : out.probs) p /= denom;
  return out;
}

// ---------------------------------------------------------------------------
// History diagnostics.
// ---------------------------------------------------------------------------

// Average overlap: how often several types put positive probability on the
// action the player actually took, weighted by those probabilities. 0 means
// the types never agreed on an observed action, 1 means they behaved
// identically.
inline double average_overlap(const History& h,
                              std::span<const StrategyPtr> types, int upto = -1) {
  if (upto < 0) upto = h.length();
  detail::require(upto >= 1, "average_overlap: needs t >= 1");
  detail::require(!types.empty(), "average_overlap: no types");
  PlayerId j = types.front()->player();
  double acc = 0.0;
  for (int tau = 0; tau < upto; ++tau) {
    ActionId aj = h.action(tau)[j];
    int support = 0;
    double mass = 0.0;
    for (const StrategyPtr& type : types) {
      double p = type->distribution(h, tau)[aj];
      if (p > 0.0) ++support;
      mass += p;
    }
    if (support >= 2) acc += mass / static_cast<double>(types.size());
  }
  return acc / upto;
}

// Average stochasticity: how far the types are from deterministic play,
// normalised so uniform play scores 1. Argmax ties break to the lowest
// action id.
inline double average_stochasticity(const History& h,
                                    std::span<const StrategyPtr> types,
                                    int upto = -1) {
  if (upto < 0) upto = h.length();
  detail::require(upto >= 1, "average_stochasticity: needs t >= 1");
  detail::require(!types.empty(), "average_stochasticity: no types");
  int num_actions = types.front()->num_actions();
  detail::require(num_actions >= 2, "average_stochasticity: needs >= 2 actions");
  double norm = 1.0 - 1.0 / num_actions;
  double acc = 0.0;
  for (int tau = 0; tau < upto; ++tau) {
    double step = 0.0;
    for (const StrategyPtr& type : types) {
      std::vector<double> dist = type->distribution(h, tau);
      double best = *std::max_element(dist.begin(), dist.end());
      step += (1.0 - best) / norm;
    }
    acc += step / static_cast<double>(types.size());
  }
  return acc / upto;
}

// Marginal probability of each action of player j after history H^t, under
// the marginal type distribution delta_j over the given types.
inline std::vector<double> marginal_action_prob(const History& h,
                                                std::span<const double> delta_j,
                                                std::span<const StrategyPtr> types,
                                                int t = -1) {
  detail::require(delta_j.size() == types.size(), "marginal_action_prob: size");
  if (t < 0) t = h.length();
  std::vector<double> f(types.front()->num_actions(), 0.0);
  for (std::size_t k = 0; k < types.size(); ++k) {
    if (delta_j[k] <= 0.0) continue;
    std::vector<double> dist = types[k]->distribution(h, t);
    for (std::size_t a = 0; a < f.size(); ++a) f[a] += delta_j[k] * dist[a];
  }
  return f;
}

// L1 distance between a posterior and the (marginal) type distribution.
inline double posterior_error(std::span<const double> posterior,
                              std::span<const double> delta_j) {
  detail::require(posterior.size() == delta_j.size(), "posterior_error: size");
  double e = 0.0;
  for (std::size_t k = 0; k < posterior.size(); ++k)
    e += std::abs(posterior[k] - delta_j[k]);
  return e;
}

// Running AO/AS accumulator for one player's type set. The values at time t
// are the means of the per-step contributions over the first t steps, so
// they match the definitional recomputation exactly.
class OverlapStats {
 public:
  explicit OverlapStats(std::vector<StrategyPtr> types) : types_(std::move(types)) {
    detail::require(!types_.empty(), "OverlapStats: no types");
  }

  void update_to(const History& h) {
    detail::require(h.length() >= cursor_, "OverlapStats: history went backwards");
    PlayerId j = types_.front()->player();
    for (; cursor_ < h.length(); ++cursor_) {
      ActionId aj = h.action(cursor_)[j];
      int support = 0;
      double mass = 0.0, stoch = 0.0;
      for (const StrategyPtr& type : types_) {
        std::vector<double> dist = type->distribution(h, cursor_);
        if (dist[aj] > 0.0) ++support;
        mass += dist[aj];
        stoch += 1.0 - *std::max_element(dist.begin(), dist.end());
      }
      if (support >= 2) overlap_acc_ += mass / static_cast<double>(types_.size());
      stoch_acc_ += stoch / static_cast<double>(types_.size());
    }
  }

  int time() const { return cursor_; }

  double average_overlap() const {
    detail::require(cursor_ >= 1, "OverlapStats: needs t >= 1");
    return overlap_acc_ / cursor_;
  }

  double average_stochasticity() const {
    detail::require(cursor_ >= 1, "OverlapStats: needs t >= 1");
    int num_actions = types_.front()->num_actions();
    detail::require(num_actions >= 2, "OverlapStats: needs >= 2 actions");
    return stoch_acc_ / (1.0 - 1.0 / num_actions) / cursor_;
  }

 private:
  std::vector<StrategyPtr> types_;
  int cursor_ = 0;
  double overlap_acc_ = 0.0;
  double stoch_acc_ = 0.0;
};

// ---------------------------------------------------------------------------
// Incremental belief accumulator.
// ---------------------------------------------------------------------------

// Running posteriors over the user-defined type spaces. Single-owner: one
// instance per run, updated in step order. Product likelihoods accumulate in
// log space with exact zeros tracked separately; sum and correlated
// accumulate as plain running sums (no decay or windowing). Degenerate
// posteriors (zero denominator) fall back to the prior and bump an event
// counter so the failure is observable, never silent.
class BeliefState {
 public:
  BeliefState(const GameSpec& spec, LikelihoodKind kind)
      : spec_(&spec), kind_(kind) {
    std::vector<PlayerId> others = spec.other_players();
    log_like_.resize(spec.num_players);
    zero_.resize(spec.num_players);
    sum_like_.resize(spec.num_players);
    for (PlayerId j : others) {
      log_like_[j].assign(spec.user_types[j].size(), 0.0);
      zero_[j].assign(spec.user_types[j].size(), 0);
      sum_like_[j].assign(spec.user_types[j].size(), 0.0);
    }
    if (kind == LikelihoodKind::correlated)
      joint_like_.assign(spec.user_joint_indexer().count(), 0.0);
  }

  LikelihoodKind kind() const { return kind_; }
  int time() const { return cursor_; }
  long degenerate_events() const { return events_; }

  // Consumes any steps of h not yet incorporated.
  void update_to(const History& h) {
    detail::require(h.length() >= cursor_, "BeliefState: history went backwards");
    while (cursor_ < h.length()) observe_step(h, cursor_);
  }

  // Posterior over player j's user types. At t=0 this is the prior.
  PlayerPosterior posterior(PlayerId j) const {
    const std::vector<double>& prior = spec_->user_priors[j];
    PlayerPosterior out;
    if (cursor_ == 0) {
      out.probs = prior;
      return out;
    }
    switch (kind_) {
      case LikelihoodKind::product: {
        out.probs.resize(prior.size());
        double max_log = 0.0;
        bool any = false;
        for (std::size_t k = 0; k < prior.size(); ++k) {
          if (zero_[j][k] || prior[k] <= 0.0) continue;
          if (!any || log_like_[j][k] > max_log) max_log = log_like_[j][k];
          any = true;
        }
        double denom = 0.0;
        for (std::size_t k = 0; k < prior.size(); ++k) {
          double w = (zero_[j][k] || !any) ? 0.0
                                           : prior[k] * std::exp(log_like_[j][k] - max_log);
          out.probs[k] = w;
          denom += w;
        }
        if (denom <= 0.0) {
          out.degenerate = true;
          out.probs = prior;
          return out;
        }
        for (double& p : out.probs) p /= denom;
        return out;
      }
      case LikelihoodKind::sum:
        return posterior_from_likelihoods(sum_like_[j], prior);
      case LikelihoodKind::correlated: {
        // Marginal of the joint posterior.
        std::vector<double> joint = combined();
        ProfileIndexer idx = spec_->user_joint_indexer();
        int slot = spec_->other_slot(j);
        out.probs.assign(prior.size(), 0.0);
        for (long long k = 0; k < idx.count(); ++k)
          out.probs[idx.unflatten(k)[slot]] += joint[k];
        out.degenerate = joint_degenerate_now();
        return out;
      }
    }
    detail::fail("BeliefState: bad kind");
  }

  // Combined posterior over the joint user type space (other-player slot
  // order), normalised. For product/sum kinds this is the product of the
  // per-player posteriors; for the correlated kind it is the joint Bayes
  // quotient against the joint prior.
  std::vector<double> combined() const {
    if (kind_ == LikelihoodKind::correlated) {
      std::vector<double> prior = spec_->effective_joint_prior();
      if (cursor_ == 0 || joint_degenerate_now()) return prior;
      std::vector<double> table(joint_like_.size());
      double denom = 0.0;
      for (std::size_t k = 0; k < joint_like_.size(); ++k) {
        table[k] = prior[k] * joint_like_[k];
        denom += table[k];
      }
      for (double& p : table) p /= denom;
      return table;
    }
    std::vector<std::vector<double>> per_player;
    for (PlayerId j : spec_->other_players())
      per_player.push_back(posterior(j).probs);
    return combined_posterior(per_player);
  }

  bool combined_degenerate() const {
    if (cursor_ == 0) return false;
    if (kind_ == LikelihoodKind::correlated) return joint_degenerate_now();
    for (PlayerId j : spec_->other_players())
      if (posterior(j).degenerate) return true;
    return false;
  }

  // Raw accumulators, used by tests to compare against the definitional
  // recomputations.
  double sum_likelihood_value(PlayerId j, int type) const { return sum_like_[j][type]; }
  LogLikelihood product_log_likelihood_value(PlayerId j, int type) const {
    return {log_like_[j][type], zero_[j][type] != 0};
  }
  double correlated_likelihood_value(long long joint_index) const {
    return joint_like_[joint_index];
  }

 private:
  bool joint_degenerate_now() const {
    if (kind_ != LikelihoodKind::correlated || cursor_ == 0) return false;
    std::vector<double> prior = spec_->effective_joint_prior();
    double denom = 0.0;
    for (std::size_t k = 0; k < joint_like_.size(); ++k)
      denom += prior[k] * joint_like_[k];
    return denom <= 0.0;
  }

  void observe_step(const History& h, int tau) {
    std::vector<PlayerId> others = spec_->other_players();
    // Per-step action probabilities for every (player, user type).
    std::vector<std::vector<double>> step(others.size());
    for (std::size_t slot = 0; slot < others.size(); ++slot) {
      PlayerId j = others[slot];
      ActionId aj = h.action(tau)[j];
      step[slot].resize(spec_->user_types[j].size());
      for (std::size_t k = 0; k < spec_->user_types[j].size(); ++k)
        step[slot][k] = spec_->user_types[j][k]->distribution(h, tau)[aj];
    }

    bool was_degenerate = any_degenerate_flag();
    for (std::size_t slot = 0; slot < others.size(); ++slot) {
      PlayerId j = others[slot];
      for (std::size_t k = 0; k < step[slot].size(); ++k) {
        double p = step[slot][k];
        sum_like_[j][k] += p;
        if (p <= 0.0)
          zero_[j][k] = 1;
        else
          log_like_[j][k] += std::log(p);
      }
    }
    if (kind_ == LikelihoodKind::correlated) {
      ProfileIndexer idx = spec_->user_joint_indexer();
      for (long long k = 0; k < idx.count(); ++k) {
        std::vector<int> profile = idx.unflatten(k);
        double p = 1.0;
        for (std::size_t slot = 0; slot < others.size(); ++slot)
          p *= step[slot][profile[slot]];
        joint_like_[k] += p;
      }
    }
    ++cursor_;
    if (!was_degenerate && any_degenerate_flag()) ++events_;
  }

  bool any_degenerate_flag() const {
    if (cursor_ == 0) return false;
    if (kind_ == LikelihoodKind::correlated) return joint_degenerate_now();
    for (PlayerId j : spec_->other_players()) {
      if (posterior(j).degenerate) return true;
    }
    return false;
  }

  const GameSpec* spec_;
  LikelihoodKind kind_;
  int cursor_ = 0;
  long events_ = 0;

  std::vector<std::vector<double>> log_like_;   // [player][type]
  std::vector<std::vector<char>> zero_;         // [player][type]
  std::vector<std::vector<double>> sum_like_;   // [player][type]
  std::vector<double> joint_like_;              // correlated kind only
};

// ---------------------------------------------------------------------------
// k-step prediction probability.
// ---------------------------------------------------------------------------

// One future step: the joint action taken and the state reached.
struct FutureStep {
  JointAction action;
  StateId next;
};

// Probability the given belief mixture assigns to a concrete future suffix:
// type profiles are held fixed over the suffix and mixed with the weight
// table, the controlled player's own actions are conditioned on, and
// transition probabilities multiply in. k = 0 gives 1.
inline double k_step_prediction_prob(
    const GameSpec& spec,
    const std::vector<std::vector<StrategyPtr>>& type_spaces,
    std::span<const double> weights, const History& real,
    std::span<const FutureStep> suffix) {
  if (suffix.empty()) return 1.0;
  std::vector<PlayerId> others = spec.other_players();
  std::vector<int> sizes;
  for (PlayerId j : others)
    sizes.push_back(static_cast<int>(type_spaces[j].size()));
  ProfileIndexer idx(sizes);
  detail::require(static_cast<long long>(weights.size()) == idx.count(),
                  "k_step_prediction_prob: weight table size");

  // Transition factors are common to every profile.
  double t_factor = 1.0;
  {
    History h = real;
    for (const FutureStep& st : suffix) {
      StateId s = h.current_state();
      detail::require(!spec.is_terminal(s),
                      "k_step_prediction_prob: suffix passes through terminal");
      double p = 0.0;
      for (const auto& [next, q] : spec.transition.row(s, st.action))
        if (next == st.next) p += q;
      t_factor *= p;
      h.push(st.action, st.next);
    }
  }
  if (t_factor <= 0.0) return 0.0;

  double mix = 0.0;
  History h = real;
  for (long long k = 0; k < idx.count(); ++k) {
    if (weights[k] <= 0.0) continue;
    std::vector<int> profile = idx.unflatten(k);
    double p = 1.0;
    for (const FutureStep& st : suffix) {
      for (std::size_t slot = 0; slot < others.size(); ++slot) {
        PlayerId j = others[slot];
        p *= type_spaces[j][profile[slot]]->distribution(h)[st.action[j]];
        if (p <= 0.0) break;
      }
      if (p <= 0.0) break;
      h.push(st.action, st.next);
    }
    while (h.length() > real.length()) h.pop();
    mix += weights[k] * p;
  }
  return mix * t_factor;
}

}  // namespace hba
