#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rue/experiments.hpp"

namespace rue {

// Fixed-precision numeric formatting (17 significant digits) so output
// files are byte-identical on any IEEE-754 double platform.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Budget token: an absolute integer or one of the symbolic schedule points
// "H/2", "H", "2H" resolved per instance from the true means.
struct BudgetToken {
  enum class Kind { Absolute, HalfH, H, TwoH } kind = Kind::Absolute;
  std::uint64_t value = 0;

  static BudgetToken parse(const std::string& raw) {
    BudgetToken t;
    if (raw == "H/2") {
      t.kind = Kind::HalfH;
    } else if (raw == "H") {
      t.kind = Kind::H;
    } else if (raw == "2H") {
      t.kind = Kind::TwoH;
    } else {
      try {
        std::size_t pos = 0;
        const long long v = std::stoll(raw, &pos);
        if (pos != raw.size() || v <= 0) throw std::invalid_argument(raw);
        t.value = static_cast<std::uint64_t>(v);
      } catch (...) {
        throw ConfigError("invalid budget token: '" + raw + "'");
      }
    }
    return t;
  }

  std::uint64_t resolve(const BanditInstance& inst) const {
    if (kind == Kind::Absolute) return value;
    const GapProfile prof = gap_profile(inst);
    if (!(prof.delta_min > 0.0))
      throw ConfigError("symbolic budget needs all gaps > 0 (H is infinite)");
    const double H = theory::complexity_H(prof);
    const auto ceilH = static_cast<std::uint64_t>(std::ceil(H));
    switch (kind) {
      case Kind::HalfH:
        return static_cast<std::uint64_t>(std::ceil(H / 2.0));
      case Kind::H: return ceilH;
      case Kind::TwoH: return 2 * ceilH;
      default: return value;
    }
  }
};

struct RunConfig {
  SetupSpec setup;
  std::vector<PolicyDescriptor> policies;
  std::vector<std::string> policy_labels;
  std::vector<BudgetToken> budgets;
  std::uint64_t replications = 100;
  std::uint64_t base_seed = 0;
  bool emit_trace = false;
  // Known-variance override for RUE (theory-validation runs).
  bool variance_known = false;
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  double nu_sq = 1.0;
  double delta = 1.0;
  std::optional<double> ucbe_a;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline SetupName parse_setup_name(const std::string& s) {
  static const std::map<std::string, SetupName> names = {
      {"F1", SetupName::F1}, {"F2", SetupName::F2}, {"F3", SetupName::F3},
      {"F4", SetupName::F4}, {"F5", SetupName::F5}, {"F6", SetupName::F6},
      {"R1", SetupName::R1}, {"R2", SetupName::R2}, {"R3", SetupName::R3},
      {"custom", SetupName::Custom}};
  const auto it = names.find(s);
  if (it == names.end()) throw ConfigError("unknown setup: '" + s + "'");
  return it->second;
}

// Flat key = value config. '#' starts a comment; lists are comma-separated.
inline RunConfig parse_run_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto get_double = [&](const std::string& key, double def) {
    const auto v = get(key);
    if (!v) return def;
    try {
      return std::stod(*v);
    } catch (...) {
      throw ConfigError("field '" + key + "': not a number: '" + *v + "'");
    }
  };
  auto get_u64 = [&](const std::string& key, std::uint64_t def) {
    const auto v = get(key);
    if (!v) return def;
    try {
      return static_cast<std::uint64_t>(std::stoull(*v));
    } catch (...) {
      throw ConfigError("field '" + key + "': not an integer: '" + *v + "'");
    }
  };

  RunConfig cfg;
  const auto setup = get("setup");
  if (!setup) throw ConfigError("missing required field 'setup'");
  cfg.setup.name = parse_setup_name(*setup);
  cfg.setup.K = static_cast<int>(get_u64("K", 20));
  cfg.setup.instance_draws = static_cast<int>(
      get_u64("instance_draws", is_random_setup(cfg.setup.name) ? 50 : 1));
  if (cfg.setup.name == SetupName::Custom) {
    const auto means = get("means");
    if (!means) throw ConfigError("custom setup requires 'means'");
    for (const std::string& m : detail::split_list(*means))
      cfg.setup.explicit_means.push_back(std::stod(m));
    cfg.setup.K = static_cast<int>(cfg.setup.explicit_means.size());
    const auto kind = get("reward_kind");
    if (kind && *kind == "gaussian") {
      cfg.setup.custom_kind = RewardKind::Gaussian;
      cfg.setup.custom_sigma_sq = get_double("reward_sigma_sq", 1.0);
    } else if (!kind || *kind == "bernoulli") {
      cfg.setup.custom_kind = RewardKind::Bernoulli;
    } else {
      throw ConfigError("unknown reward_kind: '" + *kind + "'");
    }
  }

  cfg.replications = get_u64("replications", 100);
  cfg.base_seed = get_u64("base_seed", 0);
  cfg.emit_trace = get("emit_trace").value_or("false") == "true";

  const std::string mode = get("variance_mode").value_or("estimated");
  if (mode == "known")
    cfg.variance_known = true;
  else if (mode != "estimated")
    throw ConfigError("variance_mode must be 'known' or 'estimated'");
  cfg.mu0 = get_double("mu0", 0.0);
  cfg.sigma0_sq = get_double("sigma0_sq", 1.0);
  cfg.nu_sq = get_double("nu_sq", 1.0);
  cfg.delta = get_double("delta", 1.0);
  if (const auto a = get("ucbe_a")) cfg.ucbe_a = std::stod(*a);

  const auto budgets = get("budgets");
  if (!budgets) throw ConfigError("missing required field 'budgets'");
  for (const std::string& b : detail::split_list(*budgets))
    cfg.budgets.push_back(BudgetToken::parse(b));
  if (cfg.budgets.empty()) throw ConfigError("empty budget list");

  const auto policies = get("policies");
  if (!policies) throw ConfigError("missing required field 'policies'");
  for (const std::string& p : detail::split_list(*policies)) {
    PolicyDescriptor d;
    if (p == "rue") {
      d.kind = PolicyKind::Rue;
      if (cfg.variance_known)
        d.variance_mode = VarianceModeKnown{
            PriorSpec{cfg.mu0, cfg.sigma0_sq},
            NoiseSpec{cfg.nu_sq, cfg.delta}};
    } else if (p == "ucbe") {
      d.kind = PolicyKind::Ucbe;
      d.ucbe_a = cfg.ucbe_a;
    } else if (p == "sr") {
      d.kind = PolicyKind::Sr;
    } else if (p == "sh") {
      d.kind = PolicyKind::Sh;
    } else if (p == "uniform") {
      d.kind = PolicyKind::Uniform;
    } else {
      throw ConfigError("unknown policy: '" + p + "'");
    }
    cfg.policies.push_back(std::move(d));
    cfg.policy_labels.push_back(p);
  }
  if (cfg.policies.empty()) throw ConfigError("empty policy list");
  return cfg;
}

inline RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_run_config(in);
}

}  // namespace rue
