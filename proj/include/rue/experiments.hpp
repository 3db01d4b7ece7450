#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rue/core.hpp"
#include "rue/policies.hpp"
#include "rue/theory.hpp"

namespace rue {

enum class SetupName { F1, F2, F3, F4, F5, F6, R1, R2, R3, Custom };

inline const char* setup_name_str(SetupName s) {
  switch (s) {
    case SetupName::F1: return "F1";
    case SetupName::F2: return "F2";
    case SetupName::F3: return "F3";
    case SetupName::F4: return "F4";
    case SetupName::F5: return "F5";
    case SetupName::F6: return "F6";
    case SetupName::R1: return "R1";
    case SetupName::R2: return "R2";
    case SetupName::R3: return "R3";
    case SetupName::Custom: return "custom";
  }
  return "?";
}

struct SetupSpec {
  SetupName name = SetupName::F1;
  int K = 20;
  int instance_draws = 1;  // number of sampled mean vectors for R setups
  std::vector<double> explicit_means;  // Custom only
  RewardKind custom_kind = RewardKind::Bernoulli;
  double custom_sigma_sq = 1.0;
};

inline bool is_random_setup(SetupName s) {
  return s == SetupName::R1 || s == SetupName::R2 || s == SetupName::R3;
}

// Instance generators for the fixed benchmarks F1-F6 (Bernoulli rewards,
// best arm mean 0.5) and the random setups R1-R3 (means iid U(0, 0.5)).
inline std::vector<BanditInstance> generate_setup(const SetupSpec& spec,
                                                  Rng& rng) {
  const int K = spec.K;
  if (spec.name == SetupName::Custom) {
    if (spec.explicit_means.empty())
      throw std::invalid_argument("generate_setup: Custom needs means");
    return {make_instance(spec.explicit_means, spec.custom_kind,
                          spec.custom_sigma_sq)};
  }
  if (K < 2) throw std::invalid_argument("generate_setup: K must be >= 2");

  if (is_random_setup(spec.name)) {
    const int draws = spec.instance_draws;
    std::vector<BanditInstance> out;
    out.reserve(draws);
    for (int d = 0; d < draws; ++d) {
      std::vector<double> means(K);
      for (int k = 0; k < K; ++k) means[k] = 0.5 * rng.next_double();
      if (spec.name == SetupName::R1)
        out.push_back(make_instance(std::move(means), RewardKind::Gaussian, 1.0));
      else
        out.push_back(make_instance(std::move(means), RewardKind::Bernoulli));
    }
    return out;
  }

  std::vector<double> means(K, 0.0);
  means[0] = 0.5;
  switch (spec.name) {
    case SetupName::F1:
      for (int k = 1; k < K; ++k) means[k] = 0.45;
      break;
    case SetupName::F2:
      for (int k = 1; k < K; ++k) means[k] = (k <= 7) ? 0.45 : 0.3;
      break;
    case SetupName::F3:
      for (int k = 1; k < K; ++k)
        means[k] = (k <= 4) ? 0.48 : (k <= 12 ? 0.4 : 0.3);
      break;
    case SetupName::F4:
    case SetupName::F5: {
      // Gaps run from 1/(5K) at arm 2 to 0.25 at arm K, arithmetically for
      // F4 and geometrically for F5.
      const double g2 = 1.0 / (5.0 * K);
      const double gK = 0.25;
      for (int k = 1; k < K; ++k) {
        const double frac =
            static_cast<double>(k - 1) / static_cast<double>(K - 2);
        const double gap = spec.name == SetupName::F4
                               ? g2 + frac * (gK - g2)
                               : g2 * std::pow(gK / g2, frac);
        means[k] = 0.5 - gap;
      }
      break;
    }
    case SetupName::F6:
      means[1] = 0.5 - 1.0 / (10.0 * K);
      for (int k = 2; k < K; ++k) means[k] = 0.45;
      break;
    default:
      break;
  }
  return {make_instance(std::move(means), RewardKind::Bernoulli)};
}

enum class PolicyKind { Rue, Ucbe, Sr, Sh, Uniform };

inline const char* policy_kind_str(PolicyKind k) {
  switch (k) {
    case PolicyKind::Rue: return "rue";
    case PolicyKind::Ucbe: return "ucbe";
    case PolicyKind::Sr: return "sr";
    case PolicyKind::Sh: return "sh";
    case PolicyKind::Uniform: return "uniform";
  }
  return "?";
}

struct PolicyDescriptor {
  PolicyKind kind = PolicyKind::Uniform;
  VarianceMode variance_mode = VarianceModeEstimated{};  // RUE only
  std::optional<double> ucbe_a;  // if unset, a = 2n/H from the true instance
};

struct CellResult {
  std::string setup;
  int instance_idx = 0;
  std::string policy;
  std::uint64_t budget = 0;
  std::uint64_t replications = 0;
  std::uint64_t errors = 0;
  double error_prob = 0.0;
  double stderr_value = 0.0;
  double mean_simple_regret = 0.0;
  std::uint64_t base_seed = 0;
  bool skipped = false;
  std::string skip_reason;
  bool ucbe_infeasible_input = false;  // a was derived from the true H
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  bool any_failure = false;
  std::string failure_message;
};

inline Recommendation run_policy(const PolicyDescriptor& pol,
                                 const BanditInstance& inst,
                                 std::uint64_t budget, double ucbe_a,
                                 Rng& rng, bool record_trace = false) {
  const RewardSampler sampler = make_sampler(inst);
  const std::size_t K = inst.num_arms();
  switch (pol.kind) {
    case PolicyKind::Rue:
      return run_rue(sampler, K, budget, RueConfig{pol.variance_mode}, rng,
                     record_trace);
    case PolicyKind::Ucbe:
      return run_ucbe(sampler, K, budget, UcbeConfig{ucbe_a}, rng,
                      record_trace);
    case PolicyKind::Sr:
      return run_sr(sampler, K, budget, rng, record_trace);
    case PolicyKind::Sh:
      return run_sh(sampler, K, budget, rng, record_trace);
    case PolicyKind::Uniform:
      return run_uniform(sampler, K, budget, rng, record_trace);
  }
  throw std::logic_error("run_policy: unknown policy kind");
}

// Seeded Monte Carlo replication engine. Every (instance, policy, budget,
// replication) cell draws its rewards from a child stream derived purely
// from (base_seed, instance index, policy index, budget index, replication
// index), so results do not depend on thread count or execution order.
// budgets_per_instance[i][b] is the resolved budget for instance i at
// budget slot b; symbolic schedules (H/2, H, 2H) resolve differently per
// instance, so the slot index, not the value, keys the seed derivation.
inline ExperimentResult run_experiment(
    const std::string& setup_label,
    const std::vector<BanditInstance>& instances,
    const std::vector<PolicyDescriptor>& policies,
    const std::vector<std::vector<std::uint64_t>>& budgets_per_instance,
    std::uint64_t replications, std::uint64_t base_seed,
    unsigned threads = 1) {
  if (replications < 1)
    throw std::invalid_argument("run_experiment: replications must be >= 1");
  if (budgets_per_instance.size() != instances.size())
    throw std::invalid_argument("run_experiment: budgets/instances mismatch");

  struct Cell {
    std::size_t instance_idx, policy_idx, budget_idx;
    bool skipped = false;
    std::string skip_reason;
    double ucbe_a = 0.0;
    bool ucbe_infeasible = false;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t p = 0; p < policies.size(); ++p)
      for (std::size_t b = 0; b < budgets_per_instance[i].size(); ++b) {
        Cell c{i, p, b};
        const BanditInstance& inst = instances[i];
        const std::uint64_t n = budgets_per_instance[i][b];
        const PolicyDescriptor& pol = policies[p];
        const std::uint64_t min_budget =
            pol.kind == PolicyKind::Rue ? 2 * inst.num_arms()
                                        : inst.num_arms();
        if (n < min_budget) {
          c.skipped = true;
          c.skip_reason = "budget below policy minimum";
        } else if (pol.kind == PolicyKind::Ucbe) {
          if (pol.ucbe_a) {
            c.ucbe_a = *pol.ucbe_a;
          } else {
            const GapProfile prof = gap_profile(inst);
            if (!(prof.delta_min > 0.0)) {
              c.skipped = true;
              c.skip_reason = "infinite H, cannot derive UCBE parameter";
            } else {
              c.ucbe_a = 2.0 * static_cast<double>(n) /
                         theory::complexity_H(prof);
              c.ucbe_infeasible = true;
            }
          }
        }
        cells.push_back(std::move(c));
      }

  struct RepOutcome {
    std::uint8_t error = 0;
    double regret = 0.0;
  };
  std::vector<std::vector<RepOutcome>> outcomes(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!cells[c].skipped) outcomes[c].resize(replications);

  struct Task {
    std::size_t cell;
    std::uint64_t rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!cells[c].skipped)
      for (std::uint64_t r = 0; r < replications; ++r) tasks.push_back({c, r});

  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next_task.fetch_add(1);
      if (idx >= tasks.size() || failed.load()) return;
      const Task& task = tasks[idx];
      const Cell& cell = cells[task.cell];
      const BanditInstance& inst = instances[cell.instance_idx];
      try {
        // The policy component of the key is the stable policy id, not the
        // list position, so reordering the policy list cannot change any
        // cell's outcome.
        const auto policy_id = static_cast<std::uint64_t>(
            policies[cell.policy_idx].kind);
        Rng rng(derive_stream_key(base_seed, cell.instance_idx, policy_id,
                                  cell.budget_idx, task.rep));
        const Recommendation rec = run_policy(
            policies[cell.policy_idx], inst,
            budgets_per_instance[cell.instance_idx][cell.budget_idx],
            cell.ucbe_a, rng);
        RepOutcome& out = outcomes[task.cell][task.rep];
        out.error = rec.chosen_arm != inst.best_arm ? 1 : 0;
        out.regret = inst.best_mean() - inst.means[rec.chosen_arm];
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        failure_message = e.what();
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.any_failure = failed.load();
  result.failure_message = failure_message;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    CellResult row;
    row.setup = setup_label;
    row.instance_idx = static_cast<int>(cell.instance_idx);
    row.policy = policy_kind_str(policies[cell.policy_idx].kind);
    row.budget = budgets_per_instance[cell.instance_idx][cell.budget_idx];
    row.base_seed = base_seed;
    row.skipped = cell.skipped;
    row.skip_reason = cell.skip_reason;
    row.ucbe_infeasible_input = cell.ucbe_infeasible;
    if (!cell.skipped && !result.any_failure) {
      row.replications = replications;
      double regret_sum = 0.0;
      for (const RepOutcome& o : outcomes[c]) {
        row.errors += o.error;
        regret_sum += o.regret;
      }
      const double R = static_cast<double>(replications);
      row.error_prob = static_cast<double>(row.errors) / R;
      row.stderr_value =
          std::sqrt(row.error_prob * (1.0 - row.error_prob) / R);
      row.mean_simple_regret = regret_sum / R;
    }
    result.cells.push_back(std::move(row));
  }
  return result;
}

// Convenience overload: one shared budget list for every instance.
inline ExperimentResult run_experiment(
    const std::string& setup_label,
    const std::vector<BanditInstance>& instances,
    const std::vector<PolicyDescriptor>& policies,
    const std::vector<std::uint64_t>& budgets, std::uint64_t replications,
    std::uint64_t base_seed, unsigned threads = 1) {
  return run_experiment(
      setup_label, instances, policies,
      std::vector<std::vector<std::uint64_t>>(instances.size(), budgets),
      replications, base_seed, threads);
}

// Monte Carlo oracle for the prior gap: frequency of
// {X_(1) - X_(2) <= alpha} over iid K-vectors of N(0, sigma0^2).
inline double gap_oracle(int K, double sigma0, double alpha,
                         std::uint64_t samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("gap_oracle: samples >= 1");
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    double top = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const double x = sigma0 * rng.next_normal();
      if (x > top) {
        second = top;
        top = x;
      } else if (x > second) {
        second = x;
      }
    }
    if (top - second <= alpha) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

struct RelativeCell {
  std::string setup;
  int instance_idx = 0;
  std::uint64_t budget = 0;
  double difference = 0.0;  // baseline_error - target_error
  double ratio = 0.0;       // target_error / baseline_error
  bool ratio_defined = false;
};

// Per-cell comparison of two policies present in the same result.
inline std::vector<RelativeCell> aggregate_relative(
    const ExperimentResult& results, const std::string& baseline,
    const std::string& target) {
  std::vector<RelativeCell> out;
  for (const CellResult& base : results.cells) {
    if (base.policy != baseline || base.skipped) continue;
    for (const CellResult& tgt : results.cells) {
      if (tgt.policy != target || tgt.skipped) continue;
      if (tgt.setup != base.setup || tgt.instance_idx != base.instance_idx ||
          tgt.budget != base.budget)
        continue;
      RelativeCell rel;
      rel.setup = base.setup;
      rel.instance_idx = base.instance_idx;
      rel.budget = base.budget;
      rel.difference = base.error_prob - tgt.error_prob;
      if (base.error_prob > 0.0) {
        rel.ratio = tgt.error_prob / base.error_prob;
        rel.ratio_defined = true;
      }
      out.push_back(std::move(rel));
    }
  }
  if (out.empty())
    throw std::invalid_argument("aggregate_relative: policies not found");
  return out;
}

}  // namespace rue
