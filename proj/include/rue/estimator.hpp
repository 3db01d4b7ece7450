#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rue/core.hpp"

namespace rue {

// Random-effect posterior over arm means.
//
// means[k]      = (1 - w_k) * pooled_mean + w_k * sample_mean_k
// weights[k]    = sigma0^2 / (sigma0^2 + sigma^2 / T_k)
// variances[k]  = w_k sigma^2 / T_k
//                 + (1 - w_k)^2 sigma^2 / sum_j T_j (1 - w_j)
struct PosteriorState {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<double> weights;
  double pooled_mean = 0.0;
};

struct VarianceEstimate {
  double sigma_sq_hat = 0.0;
  double sigma0_sq_hat = 0.0;
  double floor = 0.0;
};

inline constexpr double kVarianceFloor = 1e-8;

inline PosteriorState posterior(const SufficientStats& stats,
                                const PriorSpec& prior,
                                const NoiseSpec& noise) {
  prior.validate();
  noise.validate();
  const std::size_t K = stats.num_arms();
  const double sigma0_sq = prior.sigma0_sq;
  const double sigma_sq = noise.sigma_sq();

  PosteriorState post;
  post.means.resize(K);
  post.variances.resize(K);
  post.weights.resize(K);

  double pooled_num = 0.0;    // sum_k (1 - w_k) * reward_sums[k]
  double pooled_denom = 0.0;  // sum_k (1 - w_k) * T_k
  for (std::size_t k = 0; k < K; ++k) {
    if (stats.pulls[k] == 0)
      throw std::invalid_argument("posterior: arm with 0 pulls");
    const double T = static_cast<double>(stats.pulls[k]);
    const double w = sigma0_sq / (sigma0_sq + sigma_sq / T);
    post.weights[k] = w;
    pooled_num += (1.0 - w) * stats.reward_sums[k];
    pooled_denom += (1.0 - w) * T;
  }
  post.pooled_mean = pooled_num / pooled_denom;

  for (std::size_t k = 0; k < K; ++k) {
    const double T = static_cast<double>(stats.pulls[k]);
    const double w = post.weights[k];
    post.means[k] =
        (1.0 - w) * post.pooled_mean + w * stats.sample_mean(k);
    post.variances[k] = w * sigma_sq / T +
                        (1.0 - w) * (1.0 - w) * sigma_sq / pooled_denom;
  }
  return post;
}

// Method-of-moments plug-in estimates of sigma^2 (pooled within-arm) and
// sigma0^2 (unbiased between-arm quadratic with the n_* normalization).
// Non-positive moments are clamped to `floor`.
inline VarianceEstimate estimate_variances(const SufficientStats& stats,
                                           double floor = kVarianceFloor) {
  const std::size_t K = stats.num_arms();
  double within_ss = 0.0;
  double within_dof = 0.0;
  double total_pulls = 0.0;
  double total_sum = 0.0;
  double sum_sq_pulls = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (stats.pulls[k] < 2)
      throw std::invalid_argument("estimate_variances: arm with < 2 pulls");
    const double T = static_cast<double>(stats.pulls[k]);
    const double mean = stats.sample_mean(k);
    within_ss += stats.reward_sq_sums[k] - T * mean * mean;
    within_dof += T - 1.0;
    total_pulls += T;
    total_sum += stats.reward_sums[k];
    sum_sq_pulls += T * T;
  }

  VarianceEstimate est;
  est.floor = floor;
  est.sigma_sq_hat = std::max(floor, within_ss / within_dof);

  const double grand_mean = total_sum / total_pulls;
  double between_ss = 0.0;  // sum_k T_k * (mean_k - grand_mean)^2
  for (std::size_t k = 0; k < K; ++k) {
    const double T = static_cast<double>(stats.pulls[k]);
    const double u = stats.sample_mean(k) - grand_mean;
    between_ss += T * u * u;
  }
  const double n_star = total_pulls - sum_sq_pulls / total_pulls;
  est.sigma0_sq_hat = std::max(
      floor,
      (between_ss - static_cast<double>(K - 1) * est.sigma_sq_hat) / n_star);
  return est;
}

// Bound on Pr(posterior means misorder a suboptimal arm above the best):
// exp(-gap^2 / (8 tau_k^2)) + exp(-gap^2 / (8 tau_*^2)).
inline double misorder_bound(double gap, double tau_k_sq, double tau_star_sq) {
  if (!(gap >= 0.0) || !(tau_k_sq > 0.0) || !(tau_star_sq > 0.0))
    throw std::domain_error("misorder_bound: non-positive input");
  return std::exp(-gap * gap / (8.0 * tau_k_sq)) +
         std::exp(-gap * gap / (8.0 * tau_star_sq));
}

}  // namespace rue
