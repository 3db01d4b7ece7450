#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rue/rng.hpp"

namespace rue {

// Prior over arm means: mu_k ~ N(mu0, sigma0_sq).
struct PriorSpec {
  double mu0 = 0.0;
  double sigma0_sq = 1.0;

  void validate() const {
    if (!(sigma0_sq > 0.0))
      throw std::invalid_argument("PriorSpec: sigma0_sq must be > 0");
  }
};

// Reward-noise model. The working likelihood variance is sigma_sq =
// nu_sq / delta with inflation factor delta in (0, 1].
struct NoiseSpec {
  double nu_sq = 1.0;
  double delta = 1.0;

  double sigma_sq() const { return nu_sq / delta; }

  void validate() const {
    if (!(nu_sq > 0.0))
      throw std::invalid_argument("NoiseSpec: nu_sq must be > 0");
    if (!(delta > 0.0) || delta > 1.0)
      throw std::invalid_argument("NoiseSpec: delta must be in (0, 1]");
  }
};

enum class RewardKind { Gaussian, Bernoulli };

struct BanditInstance {
  std::vector<double> means;
  RewardKind reward_kind = RewardKind::Gaussian;
  double gaussian_sigma_sq = 1.0;  // reward variance when kind is Gaussian
  std::size_t best_arm = 0;

  std::size_t num_arms() const { return means.size(); }
  double best_mean() const { return means[best_arm]; }
};

// Suboptimality gaps: gaps[k] = mu* - mu_k for k != i*, and
// gaps[i*] = delta_min (the smallest gap among the other arms).
struct GapProfile {
  std::vector<double> gaps;
  double delta_min = 0.0;
};

struct SufficientStats {
  std::vector<std::uint64_t> pulls;
  std::vector<double> reward_sums;
  std::vector<double> reward_sq_sums;
  std::uint64_t round = 0;

  explicit SufficientStats(std::size_t num_arms = 0)
      : pulls(num_arms, 0),
        reward_sums(num_arms, 0.0),
        reward_sq_sums(num_arms, 0.0) {}

  std::size_t num_arms() const { return pulls.size(); }

  double sample_mean(std::size_t arm) const {
    return reward_sums[arm] / static_cast<double>(pulls[arm]);
  }
};

inline BanditInstance make_instance(std::vector<double> means,
                                    RewardKind kind,
                                    double gaussian_sigma_sq = 1.0) {
  if (means.size() < 2)
    throw std::invalid_argument("make_instance: need at least 2 arms");
  if (kind == RewardKind::Bernoulli) {
    for (double m : means)
      if (m < 0.0 || m > 1.0)
        throw std::out_of_range("make_instance: Bernoulli mean outside [0,1]");
  }
  if (kind == RewardKind::Gaussian && !(gaussian_sigma_sq > 0.0))
    throw std::invalid_argument("make_instance: Gaussian variance must be > 0");
  BanditInstance inst;
  inst.means = std::move(means);
  inst.reward_kind = kind;
  inst.gaussian_sigma_sq = gaussian_sigma_sq;
  // Lowest-index argmax breaks ties deterministically.
  inst.best_arm = static_cast<std::size_t>(
      std::max_element(inst.means.begin(), inst.means.end()) -
      inst.means.begin());
  return inst;
}

inline GapProfile gap_profile(const BanditInstance& inst) {
  GapProfile p;
  const double best = inst.best_mean();
  p.gaps.resize(inst.num_arms());
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < inst.num_arms(); ++k) {
    if (k == inst.best_arm) continue;
    p.gaps[k] = best - inst.means[k];
    dmin = std::min(dmin, p.gaps[k]);
  }
  p.delta_min = dmin;
  p.gaps[inst.best_arm] = dmin;
  return p;
}

inline double sample_reward(const BanditInstance& inst, std::size_t arm,
                            Rng& rng) {
  if (arm >= inst.num_arms())
    throw std::out_of_range("sample_reward: arm index out of range");
  if (inst.reward_kind == RewardKind::Bernoulli)
    return rng.next_bernoulli(inst.means[arm]) ? 1.0 : 0.0;
  return inst.means[arm] +
         std::sqrt(inst.gaussian_sigma_sq) * rng.next_normal();
}

inline SufficientStats update_stats(SufficientStats stats, std::size_t arm,
                                    double reward) {
  if (arm >= stats.num_arms())
    throw std::out_of_range("update_stats: arm index out of range");
  stats.pulls[arm] += 1;
  stats.reward_sums[arm] += reward;
  stats.reward_sq_sums[arm] += reward * reward;
  stats.round += 1;
  return stats;
}

}  // namespace rue
