#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hba {

using StateId = int;
using ActionId = int;
using PlayerId = int;

// A joint action, one entry per player in player order.
using JointAction = std::vector<ActionId>;

// Absolute tolerance for probability normalisation checks at load time.
inline constexpr double kProbTol = 1e-12;
// Absolute tolerance for posterior normalisation.
inline constexpr double kPosteriorTol = 1e-9;
// Absolute tolerance for argmax ties in the planner.
inline constexpr double kArgmaxTol = 1e-12;
// Absolute tolerance for chain probability comparisons.
inline constexpr double kChainTol = 1e-9;

namespace detail {

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Seeded random stream. All sampling goes through this wrapper so that
// results depend only on the seed and the call sequence, not on
// implementation-defined std:: distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * n) % n;
  }

  // Index drawn from an (assumed normalised) probability vector.
  int sample(const std::vector<double>& probs) {
    double u = uniform();
    double acc = 0.0;
    int last = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] <= 0.0) continue;
      acc += probs[k];
      last = static_cast<int>(k);
      if (u < acc) return last;
    }
    return last;
  }

  // Independent substream derived from this seed and a stream id.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(detail::splitmix64(seed ^ detail::splitmix64(stream)));
  }

 private:
  std::mt19937_64 engine_;
};

// Checks that v is a probability distribution within tol.
inline bool is_distribution(const std::vector<double>& v, double tol = kProbTol) {
  double sum = 0.0;
  for (double p : v) {
    if (p < -tol || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

inline void normalize(std::vector<double>& v) {
  double sum = 0.0;
  for (double p : v) sum += p;
  if (sum <= 0.0) detail::fail("normalize: nonpositive mass");
  for (double& p : v) p /= sum;
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require(a.size() == b.size(), "l1_distance: size mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

// Flattens tuples over a product space with per-slot cardinalities.
// Used for joint actions, joint type profiles and joint priors.
class ProfileIndexer {
 public:
  ProfileIndexer() = default;
  explicit ProfileIndexer(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    strides_.resize(sizes_.size());
    long long n = 1;
    for (int k = static_cast<int>(sizes_.size()) - 1; k >= 0; --k) {
      strides_[k] = n;
      detail::require(sizes_[k] >= 1, "ProfileIndexer: empty slot");
      n *= sizes_[k];
    }
    count_ = n;
  }

  long long count() const { return count_; }
  int slots() const { return static_cast<int>(sizes_.size()); }
  int size(int slot) const { return sizes_[slot]; }

  long long flatten(const std::vector<int>& profile) const {
    long long idx = 0;
    for (std::size_t k = 0; k < sizes_.size(); ++k) idx += profile[k] * strides_[k];
    return idx;
  }

  std::vector<int> unflatten(long long idx) const {
    std::vector<int> profile(sizes_.size());
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      profile[k] = static_cast<int>(idx / strides_[k]);
      idx %= strides_[k];
    }
    return profile;
  }

 private:
  std::vector<int> sizes_;
  std::vector<long long> strides_;
  long long count_ = 1;
};

}  // namespace hba
