#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rue/core.hpp"
#include "rue/estimator.hpp"

namespace rue {

// Reward oracle: (arm, rng) -> observed reward.
using RewardSampler = std::function<double(std::size_t, Rng&)>;

inline RewardSampler make_sampler(const BanditInstance& inst) {
  return [&inst](std::size_t arm, Rng& rng) {
    return sample_reward(inst, arm, rng);
  };
}

struct VarianceModeKnown {
  PriorSpec prior;
  NoiseSpec noise;
};

struct VarianceModeEstimated {
  double floor = kVarianceFloor;
};

using VarianceMode = std::variant<VarianceModeKnown, VarianceModeEstimated>;

struct RueConfig {
  VarianceMode variance_mode = VarianceModeEstimated{};
};

struct UcbeConfig {
  double a = 0.0;  // exploration degree; the harness sets a = 2n/H
};

struct Recommendation {
  std::size_t chosen_arm = 0;
  SufficientStats final_stats;
  std::vector<std::size_t> trace;  // per-round arm choices, if requested
};

namespace detail {

inline std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::size_t argmax_empirical(const SufficientStats& stats) {
  std::vector<double> means(stats.num_arms());
  for (std::size_t k = 0; k < stats.num_arms(); ++k)
    means[k] = stats.pulls[k] > 0
                   ? stats.sample_mean(k)
                   : -std::numeric_limits<double>::infinity();
  return argmax_lowest(means);
}

}  // namespace detail

// Optional per-round hook for the random-effect UCB policy; receives the
// round index (1-based), the stats used to compute the round's indices, and
// the posterior those stats produced.
using RueObserver =
    std::function<void(std::uint64_t round, const SufficientStats&,
                       const PosteriorState&)>;

// Random-effect UCB exploration. Pulls every arm twice, then repeatedly
// pulls argmax_k mu_hat_k + sqrt(2 tau_k^2 log n); recommends the arm with
// the highest final posterior mean. Ties break to the lowest index.
inline Recommendation run_rue(const RewardSampler& sample, std::size_t K,
                              std::uint64_t budget, const RueConfig& config,
                              Rng& rng, bool record_trace = false,
                              const RueObserver& observer = nullptr) {
  if (budget < 2 * K)
    throw std::invalid_argument("run_rue: budget must be >= 2K");

  SufficientStats stats(K);
  std::vector<std::size_t> trace;
  if (record_trace) trace.reserve(budget);

  auto pull = [&](std::size_t arm) {
    stats = update_stats(stats, arm, sample(arm, rng));
    if (record_trace) trace.push_back(arm);
  };

  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t k = 0; k < K; ++k) pull(k);

  const double logn = std::log(static_cast<double>(budget));
  auto compute_posterior = [&]() -> PosteriorState {
    if (const auto* known = std::get_if<VarianceModeKnown>(&config.variance_mode))
      return posterior(stats, known->prior, known->noise);
    const auto& est_mode = std::get<VarianceModeEstimated>(config.variance_mode);
    const VarianceEstimate est = estimate_variances(stats, est_mode.floor);
    return posterior(stats, PriorSpec{0.0, est.sigma0_sq_hat},
                     NoiseSpec{est.sigma_sq_hat, 1.0});
  };

  for (std::uint64_t t = 2 * K + 1; t <= budget; ++t) {
    const PosteriorState post = compute_posterior();
    if (observer) observer(t, stats, post);
    std::vector<double> ucb(K);
    for (std::size_t k = 0; k < K; ++k)
      ucb[k] = post.means[k] + std::sqrt(2.0 * post.variances[k] * logn);
    pull(detail::argmax_lowest(ucb));
  }

  const PosteriorState final_post = compute_posterior();
  Recommendation rec;
  rec.chosen_arm = detail::argmax_lowest(final_post.means);
  rec.final_stats = std::move(stats);
  rec.trace = std::move(trace);
  return rec;
}

// UCBE: after one pull per arm, pulls argmax_k rbar_k + sqrt(a / T_k) and
// recommends the highest empirical mean. Infeasible baseline: `a` is derived
// from the true complexity H by the caller.
inline Recommendation run_ucbe(const RewardSampler& sample, std::size_t K,
                               std::uint64_t budget, const UcbeConfig& config,
                               Rng& rng, bool record_trace = false) {
  if (budget < K)
    throw std::invalid_argument("run_ucbe: budget must be >= K");
  if (!(config.a > 0.0))
    throw std::invalid_argument("run_ucbe: a must be > 0");

  SufficientStats stats(K);
  std::vector<std::size_t> trace;
  if (record_trace) trace.reserve(budget);
  auto pull = [&](std::size_t arm) {
    stats = update_stats(stats, arm, sample(arm, rng));
    if (record_trace) trace.push_back(arm);
  };

  for (std::size_t k = 0; k < K && stats.round < budget; ++k) pull(k);

  std::vector<double> index(K);
  while (stats.round < budget) {
    for (std::size_t k = 0; k < K; ++k)
      index[k] = stats.sample_mean(k) +
                 std::sqrt(config.a / static_cast<double>(stats.pulls[k]));
    pull(detail::argmax_lowest(index));
  }

  Recommendation rec;
  rec.chosen_arm = detail::argmax_empirical(stats);
  rec.final_stats = std::move(stats);
  rec.trace = std::move(trace);
  return rec;
}

// Successive rejects. K-1 phases; in phase j every surviving arm is pulled
// up to n_j = ceil((n - K) / (logbar(K) (K + 1 - j))) total pulls, then the
// survivor with the lowest empirical mean is dropped (ties drop the highest
// index). Leftover budget goes to the survivors round-robin in index order.
inline Recommendation run_sr(const RewardSampler& sample, std::size_t K,
                             std::uint64_t budget, Rng& rng,
                             bool record_trace = false) {
  if (budget < K) throw std::invalid_argument("run_sr: budget must be >= K");

  double logbar = 0.5;
  for (std::size_t i = 2; i <= K; ++i) logbar += 1.0 / static_cast<double>(i);

  SufficientStats stats(K);
  std::vector<std::size_t> trace;
  if (record_trace) trace.reserve(budget);
  auto pull = [&](std::size_t arm) {
    stats = update_stats(stats, arm, sample(arm, rng));
    if (record_trace) trace.push_back(arm);
  };

  std::vector<std::size_t> survivors(K);
  for (std::size_t k = 0; k < K; ++k) survivors[k] = k;

  for (std::size_t j = 1; j < K && survivors.size() > 1; ++j) {
    const double target = std::ceil(
        static_cast<double>(budget - K) /
        (logbar * static_cast<double>(K + 1 - j)));
    const auto n_j = static_cast<std::uint64_t>(target);
    for (std::size_t arm : survivors)
      while (stats.pulls[arm] < n_j && stats.round < budget) pull(arm);
    // Drop the worst survivor; on ties the highest index goes.
    std::size_t worst = survivors[0];
    for (std::size_t arm : survivors) {
      const double m_arm = stats.pulls[arm] > 0
                               ? stats.sample_mean(arm)
                               : -std::numeric_limits<double>::infinity();
      const double m_worst = stats.pulls[worst] > 0
                                 ? stats.sample_mean(worst)
                                 : -std::numeric_limits<double>::infinity();
      if (m_arm < m_worst || (m_arm == m_worst && arm > worst)) worst = arm;
    }
    std::erase(survivors, worst);
  }

  for (std::size_t i = 0; stats.round < budget; ++i)
    pull(survivors[i % survivors.size()]);

  Recommendation rec;
  rec.chosen_arm = survivors.front();
  rec.final_stats = std::move(stats);
  rec.trace = std::move(trace);
  return rec;
}

// Sequential halving. ceil(log2 K) phases; each phase pulls every survivor
// floor(n / (|S| ceil(log2 K))) times and keeps the top ceil(|S|/2) by the
// empirical mean of this phase's pulls alone (ties keep the lowest index).
inline Recommendation run_sh(const RewardSampler& sample, std::size_t K,
                             std::uint64_t budget, Rng& rng,
                             bool record_trace = false) {
  if (budget < K) throw std::invalid_argument("run_sh: budget must be >= K");
  const auto phases = static_cast<std::uint64_t>(
      std::ceil(std::log2(static_cast<double>(K))));

  SufficientStats stats(K);
  std::vector<std::size_t> trace;
  if (record_trace) trace.reserve(budget);
  auto pull = [&](std::size_t arm) -> double {
    const double r = sample(arm, rng);
    stats = update_stats(stats, arm, r);
    if (record_trace) trace.push_back(arm);
    return r;
  };

  std::vector<std::size_t> survivors(K);
  for (std::size_t k = 0; k < K; ++k) survivors[k] = k;

  for (std::uint64_t r = 0; r < phases && survivors.size() > 1; ++r) {
    const std::uint64_t per_arm =
        budget / (survivors.size() * phases);
    if (per_arm == 0)
      throw std::invalid_argument("run_sh: per-arm phase allocation is 0");
    std::vector<double> phase_mean(survivors.size(), 0.0);
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      double sum = 0.0;
      for (std::uint64_t p = 0; p < per_arm; ++p) sum += pull(survivors[i]);
      phase_mean[i] = sum / static_cast<double>(per_arm);
    }
    const std::size_t keep = (survivors.size() + 1) / 2;
    // Stable partial sort by descending phase mean keeps lowest indices on
    // ties (survivors are in increasing index order).
    std::vector<std::size_t> order(survivors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return phase_mean[a] > phase_mean[b];
                     });
    std::vector<std::size_t> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) next.push_back(survivors[order[i]]);
    std::sort(next.begin(), next.end());
    survivors = std::move(next);
  }

  for (std::size_t i = 0; stats.round < budget; ++i)
    pull(survivors[i % survivors.size()]);

  Recommendation rec;
  rec.chosen_arm = survivors.front();
  rec.final_stats = std::move(stats);
  rec.trace = std::move(trace);
  return rec;
}

// Round-robin allocation; recommends the highest empirical mean.
inline Recommendation run_uniform(const RewardSampler& sample, std::size_t K,
                                  std::uint64_t budget, Rng& rng,
                                  bool record_trace = false) {
  if (budget < K)
    throw std::invalid_argument("run_uniform: budget must be >= K");
  SufficientStats stats(K);
  std::vector<std::size_t> trace;
  if (record_trace) trace.reserve(budget);
  for (std::uint64_t t = 0; t < budget; ++t) {
    const std::size_t arm = t % K;
    stats = update_stats(stats, arm, sample(arm, rng));
    if (record_trace) trace.push_back(arm);
  }
  Recommendation rec;
  rec.chosen_arm = detail::argmax_empirical(stats);
  rec.final_stats = std::move(stats);
  rec.trace = std::move(trace);
  return rec;
}

}  // namespace rue
