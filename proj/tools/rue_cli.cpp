// Command-line front end: experiment runs, theory tables, the prior-gap
// oracle check, and plot-ready aggregation of cells files.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rue/config.hpp"
#include "rue/experiments.hpp"
#include "rue/theory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr const char* kCellsHeader =
    "setup,instance_idx,policy,budget,replications,errors,error_prob,stderr,"
    "mean_simple_regret,base_seed,skipped,skip_reason";

rue::NoiseSpec make_noise(double sigma_sq, double delta) {
  return rue::NoiseSpec{sigma_sq * delta, delta};
}

void write_cells_csv(const std::string& path,
                     const rue::ExperimentResult& result) {
  std::ofstream out(path);
  out << kCellsHeader << "\n";
  for (const rue::CellResult& c : result.cells) {
    out << c.setup << ',' << c.instance_idx << ',' << c.policy << ','
        << c.budget << ',' << c.replications << ',' << c.errors << ','
        << rue::format_double(c.error_prob) << ','
        << rue::format_double(c.stderr_value) << ','
        << rue::format_double(c.mean_simple_regret) << ',' << c.base_seed
        << ',' << (c.skipped ? 1 : 0) << ',' << c.skip_reason << "\n";
  }
}

int cmd_run(const std::string& config_path, const std::string& output_dir,
            unsigned threads, std::optional<std::uint64_t> seed_override) {
  rue::RunConfig cfg;
  try {
    cfg = rue::parse_run_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  if (seed_override) cfg.base_seed = *seed_override;

  fs::create_directories(output_dir);

  rue::Rng setup_rng(rue::derive_stream_key(cfg.base_seed, 0xA11CEULL));
  const std::vector<rue::BanditInstance> instances =
      rue::generate_setup(cfg.setup, setup_rng);

  std::vector<std::vector<std::uint64_t>> budgets(instances.size());
  json meta_instances = json::array();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const rue::GapProfile prof = rue::gap_profile(instances[i]);
    json mi;
    mi["instance_idx"] = i;
    mi["best_arm"] = instances[i].best_arm;
    mi["delta_min"] = prof.delta_min;
    if (prof.delta_min > 0.0)
      mi["H"] = rue::theory::complexity_H(prof);
    else
      mi["H"] = "infinite";
    json resolved = json::array();
    for (const rue::BudgetToken& b : cfg.budgets) {
      try {
        const std::uint64_t n = b.resolve(instances[i]);
        budgets[i].push_back(n);
        resolved.push_back(n);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
      }
    }
    mi["budgets"] = resolved;
    meta_instances.push_back(mi);
  }

  const rue::ExperimentResult result = rue::run_experiment(
      rue::setup_name_str(cfg.setup.name), instances, cfg.policies, budgets,
      cfg.replications, cfg.base_seed, threads);
  if (result.any_failure) {
    std::cerr << "cell failure: " << result.failure_message << "\n";
    return 2;
  }

  write_cells_csv((fs::path(output_dir) / "cells.csv").string(), result);

  json meta;
  meta["version"] = kVersion;
  meta["setup"] = rue::setup_name_str(cfg.setup.name);
  meta["K"] = cfg.setup.K;
  meta["instance_draws"] = cfg.setup.instance_draws;
  meta["replications"] = cfg.replications;
  meta["base_seed"] = cfg.base_seed;
  meta["variance_mode"] = cfg.variance_known ? "known" : "estimated";
  meta["policies"] = cfg.policy_labels;
  meta["instances"] = meta_instances;
  std::ofstream mf(fs::path(output_dir) / "meta.json");
  mf << meta.dump(2) << "\n";
  return 0;
}

int cmd_theory(int K, const std::vector<std::uint64_t>& n_values,
               double sigma0_sq, double sigma_sq, double delta, bool tuned,
               std::optional<double> H_opt, double gap,
               const std::string& output_dir) {
  fs::create_directories(output_dir);
  std::ofstream out(fs::path(output_dir) / "theory.csv");
  out << "n,theorem2_bound,theorem3_bound,ucbe_upper_bound,"
         "small_gap_threshold,small_gap_threshold_lower,"
         "full_info_error_exact,full_info_error_lower,lower_vacuous,"
         "H_b,c_K,c_K_small_k,delta,flags\n";
  const rue::theory::Constants c =
      rue::theory::constants(K, sigma0_sq, sigma_sq);
  if (tuned) delta = rue::theory::tuned_delta(K, sigma0_sq, sigma_sq);
  const rue::PriorSpec prior{0.0, sigma0_sq};
  const rue::NoiseSpec noise = make_noise(sigma_sq, delta);
  for (const std::uint64_t n : n_values) {
    std::string flags;
    auto fail = [&flags](const char* what) {
      if (!flags.empty()) flags += ';';
      flags += what;
      return std::numeric_limits<double>::quiet_NaN();
    };
    double t2, t3, ucbe, fexact;
    rue::theory::LowerBoundResult flower{};
    try {
      t2 = rue::theory::theorem2_bound(n, K, prior, noise);
    } catch (...) {
      t2 = fail("theorem2_domain");
    }
    try {
      t3 = rue::theory::theorem3_bound(n, K, prior, noise);
    } catch (...) {
      t3 = fail("theorem3_domain");
    }
    // Default H is the small-gap boundary value n / (27 log n).
    const double H = H_opt ? *H_opt
                           : static_cast<double>(n) /
                                 (27.0 * std::log(static_cast<double>(n)));
    try {
      ucbe = rue::theory::ucbe_upper_bound(n, K, H);
    } catch (...) {
      ucbe = fail("ucbe_domain");
    }
    try {
      fexact = rue::theory::full_info_error_exact(n, gap, sigma_sq);
      flower = rue::theory::full_info_error_lower(n, gap, sigma_sq);
    } catch (...) {
      fexact = fail("full_info_domain");
    }
    out << n << ',' << rue::format_double(t2) << ',' << rue::format_double(t3)
        << ',' << rue::format_double(ucbe) << ','
        << rue::format_double(rue::theory::small_gap_threshold(n)) << ','
        << rue::format_double(rue::theory::small_gap_threshold_lower(n)) << ','
        << rue::format_double(fexact) << ','
        << rue::format_double(flower.value) << ','
        << (flower.vacuous ? 1 : 0) << ',' << rue::format_double(c.H_b) << ','
        << rue::format_double(c.c_K_value) << ',' << (c.c_K_small_k ? 1 : 0)
        << ',' << rue::format_double(delta) << ',' << flags << "\n";
  }
  return 0;
}

int cmd_oracle(int K, double sigma0, const std::vector<double>& alphas,
               std::uint64_t samples, std::uint64_t seed,
               const std::string& output_dir) {
  fs::create_directories(output_dir);
  std::ofstream out(fs::path(output_dir) / "oracle.csv");
  out << "alpha,empirical,stderr,bound_raw,bound_clamped,small_k,pass\n";
  for (const double alpha : alphas) {
    rue::Rng rng(rue::derive_stream_key(seed, 0x0AC1EULL,
                                        static_cast<std::uint64_t>(K)));
    double empirical = 0.0;
    double raw = 0.0, clamped = 0.0;
    bool small_k = false;
    if (alpha > 0.0) {
      empirical = rue::gap_oracle(K, sigma0, alpha, samples, rng);
      const rue::theory::GapBound b =
          rue::theory::gap_probability_bound(alpha, sigma0, K);
      raw = b.raw;
      clamped = b.clamped;
      small_k = b.small_k;
    }
    const double se =
        std::sqrt(empirical * (1.0 - empirical) /
                  static_cast<double>(samples));
    const bool pass = empirical <= clamped + 3.0 * se;
    out << rue::format_double(alpha) << ',' << rue::format_double(empirical)
        << ',' << rue::format_double(se) << ',' << rue::format_double(raw)
        << ',' << rue::format_double(clamped) << ',' << (small_k ? 1 : 0)
        << ',' << (pass ? 1 : 0) << "\n";
  }
  return 0;
}

struct PooledCell {
  std::uint64_t errors = 0;
  std::uint64_t replications = 0;
  double regret_weighted = 0.0;
};

int cmd_plot_data(const std::vector<std::string>& cells_files,
                  const std::string& output_dir) {
  // key: (setup, budget) -> policy -> pooled counts
  std::map<std::pair<std::string, std::uint64_t>,
           std::map<std::string, PooledCell>>
      pooled;
  std::set<std::string> policies;

  for (const std::string& path : cells_files) {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "cannot open: " << path << "\n";
      return 1;
    }
    std::string header;
    std::getline(in, header);
    if (header != kCellsHeader) {
      std::cerr << "schema mismatch in " << path << "\n  expected: "
                << kCellsHeader << "\n  found:    " << header << "\n";
      return 1;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (fields.size() < 11) {
        std::cerr << "malformed row in " << path << ": " << line << "\n";
        return 1;
      }
      if (fields[10] == "1") continue;  // skipped cell
      const std::string& setup = fields[0];
      const std::string& policy = fields[2];
      const std::uint64_t budget = std::stoull(fields[3]);
      const std::uint64_t reps = std::stoull(fields[4]);
      const std::uint64_t errors = std::stoull(fields[5]);
      const double regret = std::stod(fields[8]);
      PooledCell& cell = pooled[{setup, budget}][policy];
      cell.errors += errors;
      cell.replications += reps;
      cell.regret_weighted += regret * static_cast<double>(reps);
      policies.insert(policy);
    }
  }

  fs::create_directories(output_dir);
  std::ofstream out(fs::path(output_dir) / "plot.csv");
  out << "setup,budget";
  for (const std::string& p : policies)
    out << ',' << p << "_error," << p << "_stderr," << p << "_regret";
  out << "\n";
  for (const auto& [key, by_policy] : pooled) {
    out << key.first << ',' << key.second;
    for (const std::string& p : policies) {
      const auto it = by_policy.find(p);
      if (it == by_policy.end() || it->second.replications == 0) {
        out << ",,,";
        continue;
      }
      const PooledCell& cell = it->second;
      const double R = static_cast<double>(cell.replications);
      const double prob = static_cast<double>(cell.errors) / R;
      out << ',' << rue::format_double(prob) << ','
          << rue::format_double(std::sqrt(prob * (1.0 - prob) / R)) << ','
          << rue::format_double(cell.regret_weighted / R);
    }
    out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-budget best-arm identification laboratory"};
  app.require_subcommand(1);

  std::string output_dir = ".";
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--output-dir", output_dir, "directory for output files");
  app.add_option("--threads", threads,
                 "worker threads (does not affect results)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "base seed override");

  auto* run = app.add_subcommand("run", "run a config-driven experiment");
  std::string config_path;
  run->add_option("config", config_path, "config file")->required();

  auto* theory = app.add_subcommand("theory", "emit a theory table");
  int K = 40;
  std::vector<std::uint64_t> n_values;
  double sigma0_sq = 1.0, sigma_sq = 1.0, delta = 1.0, gap = 0.2;
  bool tuned = false;
  std::optional<double> H_opt;
  double H_value = 0.0;
  theory->add_option("--K", K, "number of arms");
  theory->add_option("--n", n_values, "budget values")->required();
  theory->add_option("--sigma0-sq", sigma0_sq, "prior variance");
  theory->add_option("--sigma-sq", sigma_sq, "working likelihood variance");
  theory->add_option("--delta", delta, "likelihood inflation factor");
  theory->add_flag("--tuned-delta", tuned,
                   "use the delta that makes the tail term O(K/n)");
  auto* h_flag = theory->add_option("--H", H_value,
                                    "complexity for the UCBE bound column");
  theory->add_option("--gap", gap, "gap for the full-information columns");

  auto* oracle = app.add_subcommand("oracle", "Monte Carlo prior-gap check");
  int oK = 40;
  double sigma0 = 1.0;
  std::vector<double> alphas;
  std::uint64_t samples = 100000;
  oracle->add_option("--K", oK, "number of arms");
  oracle->add_option("--sigma0", sigma0, "prior standard deviation");
  oracle->add_option("--alphas", alphas, "gap thresholds")->required();
  oracle->add_option("--samples", samples, "Monte Carlo sample count");

  auto* plot = app.add_subcommand("plot-data", "pivot cells files");
  std::vector<std::string> cells_files;
  plot->add_option("files", cells_files, "cells.csv inputs")->required();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) seed = seed_value;
  if (h_flag->count() > 0) H_opt = H_value;

  try {
    if (run->parsed())
      return cmd_run(config_path, output_dir, threads, seed);
    if (theory->parsed())
      return cmd_theory(K, n_values, sigma0_sq, sigma_sq, delta, tuned, H_opt,
                        gap, output_dir);
    if (oracle->parsed())
      return cmd_oracle(oK, sigma0, alphas, samples, seed.value_or(0),
                        output_dir);
    if (plot->parsed()) return cmd_plot_data(cells_files, output_dir);
  } catch (const rue::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
