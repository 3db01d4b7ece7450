#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "rue/core.hpp"

using namespace rue;

TEST_CASE("make_instance picks the lowest-index argmax") {
  std::vector<double> means(20, 0.45);
  means[0] = 0.5;
  const BanditInstance inst = make_instance(means, RewardKind::Bernoulli);
  CHECK(inst.best_arm == 0);
  CHECK(gap_profile(inst).delta_min == Catch::Approx(0.05));

  const BanditInstance tie = make_instance({0.3, 0.3}, RewardKind::Gaussian);
  CHECK(tie.best_arm == 0);
  CHECK(gap_profile(tie).delta_min == 0.0);

  const BanditInstance inst3 =
      make_instance({0.25, 0.49, 0.5}, RewardKind::Gaussian);
  CHECK(inst3.best_arm == 2);
  const GapProfile prof = gap_profile(inst3);
  CHECK(prof.gaps[0] == Catch::Approx(0.25));
  CHECK(prof.gaps[1] == Catch::Approx(0.01));
  CHECK(prof.gaps[2] == Catch::Approx(0.01));
}

TEST_CASE("make_instance rejects bad input") {
  CHECK_THROWS_AS(make_instance({}, RewardKind::Gaussian),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_instance({0.5}, RewardKind::Gaussian),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_instance({0.5, 1.2}, RewardKind::Bernoulli),
                  std::out_of_range);
  CHECK_THROWS_AS(make_instance({-0.1, 0.5}, RewardKind::Bernoulli),
                  std::out_of_range);
}

TEST_CASE("gaps entry at the best arm equals the minimum over the rest") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + static_cast<int>(rng.next_u64() % 10);
    std::vector<double> means(K);
    for (double& m : means) m = rng.next_double();
    const BanditInstance inst = make_instance(means, RewardKind::Gaussian);
    const GapProfile prof = gap_profile(inst);
    double expected = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < means.size(); ++k)
      if (k != inst.best_arm) expected = std::min(expected, prof.gaps[k]);
    CHECK(prof.gaps[inst.best_arm] == expected);
    for (double g : prof.gaps) CHECK(g >= 0.0);
  }
}

TEST_CASE("sample_reward degenerate Bernoulli") {
  const BanditInstance inst = make_instance({1.0, 0.0}, RewardKind::Bernoulli);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(sample_reward(inst, 0, rng) == 1.0);
    CHECK(sample_reward(inst, 1, rng) == 0.0);
  }
  CHECK_THROWS_AS(sample_reward(inst, 2, rng), std::out_of_range);
}

TEST_CASE("Bernoulli rewards are always 0 or 1") {
  const BanditInstance inst = make_instance({0.3, 0.7}, RewardKind::Bernoulli);
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double r = sample_reward(inst, i % 2, rng);
    CHECK((r == 0.0 || r == 1.0));
  }
}

TEST_CASE("Bernoulli sample mean concentrates", "[slow]") {
  const BanditInstance inst = make_instance({0.5, 0.5}, RewardKind::Bernoulli);
  Rng rng(3);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_reward(inst, 0, rng);
  CHECK(sum / n == Catch::Approx(0.5).margin(0.002));
}

TEST_CASE("Gaussian sample variance concentrates", "[slow]") {
  const BanditInstance inst =
      make_instance({0.0, 0.0}, RewardKind::Gaussian, 1.0);
  Rng rng(4);
  const int n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = sample_reward(inst, 0, rng);
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / n;
  CHECK(sum_sq / n - mean * mean == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("update_stats basics") {
  SufficientStats stats(3);
  stats = update_stats(stats, 0, 1.0);
  CHECK(stats.pulls == std::vector<std::uint64_t>{1, 0, 0});
  CHECK(stats.reward_sums[0] == 1.0);
  CHECK(stats.round == 1);

  stats = update_stats(stats, 1, 0.2);
  stats = update_stats(stats, 1, 0.4);
  CHECK(stats.reward_sums[1] == Catch::Approx(0.6));
  CHECK(stats.reward_sq_sums[1] == Catch::Approx(0.20));
  CHECK(stats.round == 3);
  CHECK(stats.round == stats.pulls[0] + stats.pulls[1] + stats.pulls[2]);

  CHECK_THROWS_AS(update_stats(stats, 5, 0.0), std::out_of_range);
}

TEST_CASE("update_stats is order-insensitive over a reward multiset") {
  // Rewards are quarter-integers, so all sums are exact and permutation
  // invariance holds bit-for-bit.
  std::mt19937 shuffle_rng(11);
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 4;
    std::vector<std::pair<std::size_t, double>> updates;
    for (int i = 0; i < 60; ++i)
      updates.emplace_back(rng.next_u64() % K,
                           0.25 * static_cast<double>(rng.next_u64() % 5));
    SufficientStats a(K);
    for (const auto& [arm, r] : updates) a = update_stats(a, arm, r);
    std::shuffle(updates.begin(), updates.end(), shuffle_rng);
    SufficientStats b(K);
    for (const auto& [arm, r] : updates) b = update_stats(b, arm, r);
    CHECK(a.pulls == b.pulls);
    CHECK(a.reward_sums == b.reward_sums);
    CHECK(a.reward_sq_sums == b.reward_sq_sums);
    CHECK(a.round == b.round);
  }
}
