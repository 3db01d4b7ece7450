#pragma once

#include <cmath>
#include <stdexcept>

#include "rue/core.hpp"

namespace rue {
namespace theory {

inline constexpr double kSqrt2Pi = 2.5066282746310005024;

// Standard normal CDF.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Gap-probability constant c_K. For small K the inner logarithm's argument
// K / (4 sqrt(2 pi) ln K) drops below 1 and the leading term is not real;
// the value is then clamped to the additive constant 2/sqrt(2 pi) and
// `small_k` is set.
struct CkResult {
  double value = 0.0;
  bool small_k = false;
};

inline CkResult c_K(int K) {
  if (K < 2) throw std::domain_error("c_K: K must be >= 2");
  const double lnK = std::log(static_cast<double>(K));
  const double inner = static_cast<double>(K) / (4.0 * kSqrt2Pi * lnK);
  CkResult r;
  if (inner <= 1.0) {
    r.value = 2.0 / kSqrt2Pi;
    r.small_k = true;
    return r;
  }
  r.value = 4.0 * std::sqrt(2.0) * lnK * std::sqrt(std::log(inner)) +
            2.0 / kSqrt2Pi;
  return r;
}

// All closed-form constants of the failure-probability analysis for a given
// bandit class (K, sigma0^2, sigma^2).
struct Constants {
  double rho = 0.0;    // sqrt((K(s0+s)+s/s0) / (K(s0+s)+s0))
  double eta = 0.0;    // 1 / (1 + 4 rho)
  double beta = 0.0;   // 1 + K^-1 sigma^2 / sigma0^2
  double beta1 = 0.0;  // 1 + K^-1 sigma0^2 / (sigma0^2 + sigma^2)
  double m = 0.0;      // beta1 (1+4rho)^-2 sigma0^2 / sigma^2
  double gamma = 0.0;  // 2 (1+4rho)^-1 (2+4rho) c_K
  double kappa = 0.0;  // 4 (1+4rho)^-1 (2+4rho) c_K sqrt(log K)
  double H_b = 0.0;    // (K + sigma^2/sigma0^2) sigma^2
  double c_K_value = 0.0;
  bool c_K_small_k = false;
};

inline Constants constants(int K, double sigma0_sq, double sigma_sq) {
  if (K < 2) throw std::domain_error("constants: K must be >= 2");
  if (!(sigma0_sq > 0.0) || !(sigma_sq > 0.0))
    throw std::domain_error("constants: variances must be > 0");
  const double Kd = static_cast<double>(K);
  Constants c;
  c.rho = std::sqrt((Kd * (sigma0_sq + sigma_sq) + sigma_sq / sigma0_sq) /
                    (Kd * (sigma0_sq + sigma_sq) + sigma0_sq));
  c.eta = 1.0 / (1.0 + 4.0 * c.rho);
  c.beta = 1.0 + sigma_sq / (Kd * sigma0_sq);
  c.beta1 = 1.0 + sigma0_sq / (Kd * (sigma0_sq + sigma_sq));
  c.m = c.beta1 * c.eta * c.eta * sigma0_sq / sigma_sq;
  const CkResult ck = c_K(K);
  c.c_K_value = ck.value;
  c.c_K_small_k = ck.small_k;
  c.gamma = 2.0 * c.eta * (2.0 + 4.0 * c.rho) * ck.value;
  c.kappa = 2.0 * c.gamma * std::sqrt(std::log(Kd));
  c.H_b = (Kd + sigma_sq / sigma0_sq) * sigma_sq;
  return c;
}

// Gap-based complexity H = sum_k Delta_k^-2.
inline double complexity_H(const GapProfile& profile) {
  double H = 0.0;
  for (double g : profile.gaps) {
    if (!(g > 0.0))
      throw std::domain_error("complexity_H: zero gap, H is infinite");
    H += 1.0 / (g * g);
  }
  return H;
}

// Pr(top gap of K iid N(0, sigma0^2) means <= delta) <= c_K delta / sigma0,
// clamped to 1.
struct GapBound {
  double raw = 0.0;      // possibly vacuous (> 1)
  double clamped = 0.0;  // min(1, raw)
  bool small_k = false;
};

inline GapBound gap_probability_bound(double delta, double sigma0, int K) {
  if (!(delta > 0.0) || !(sigma0 > 0.0))
    throw std::domain_error("gap_probability_bound: inputs must be > 0");
  const CkResult ck = c_K(K);
  GapBound b;
  b.raw = ck.value * delta / sigma0;
  b.clamped = std::min(1.0, b.raw);
  b.small_k = ck.small_k;
  return b;
}

// The delta choice that makes the last term of the failure bound O(K/n).
inline double tuned_delta(int K, double sigma0_sq, double sigma_sq) {
  const Constants c = constants(K, sigma0_sq, sigma_sq);
  return sigma_sq * c.m / (2.0 * (2.0 * sigma0_sq + sigma_sq));
}

// Failure-probability upper bound for the random-effect UCB policy.
inline double theorem2_bound(std::uint64_t n, int K, const PriorSpec& prior,
                             const NoiseSpec& noise) {
  const double Kd = static_cast<double>(K);
  const double nd = static_cast<double>(n);
  if (nd < 4.0 * (Kd - 1.0))
    throw std::invalid_argument("theorem2_bound: need n >= 4(K-1)");
  const double sigma_sq = noise.sigma_sq();
  const Constants c = constants(K, prior.sigma0_sq, sigma_sq);
  const double logn = std::log(nd);
  const double term1 =
      c.gamma * std::sqrt(c.H_b * (Kd - 1.0) * logn / (nd * Kd));
  const double denom2 = Kd * (nd - 4.0 * (Kd - 1.0));
  const double term2 =
      denom2 > 0.0 ? c.gamma * std::sqrt(c.H_b * logn / denom2)
                   : std::numeric_limits<double>::infinity();
  const double term3 = Kd * std::pow(nd, -c.m * Kd + 1.0);
  const double expo =
      sigma_sq * c.m / (noise.delta * (2.0 * prior.sigma0_sq + sigma_sq));
  const double term4 = Kd * std::pow(nd, -expo + 1.0);
  return term1 + term2 + term3 + term4;
}

// Simple-Bayes-regret upper bound.
inline double theorem3_bound(std::uint64_t n, int K, const PriorSpec& prior,
                             const NoiseSpec& noise) {
  const double Kd = static_cast<double>(K);
  const double nd = static_cast<double>(n);
  if (!(nd > 4.0 * (Kd - 1.0)))
    throw std::invalid_argument("theorem3_bound: need n > 4(K-1)");
  const double sigma_sq = noise.sigma_sq();
  const Constants c = constants(K, prior.sigma0_sq, sigma_sq);
  const double logn = std::log(nd);
  const double term1 =
      c.kappa * std::sqrt(2.0 * c.H_b * (Kd - 1.0) * logn / (nd * Kd));
  const double term2 =
      c.kappa * std::sqrt(2.0 * c.H_b * logn / (Kd * (nd - 4.0 * (Kd - 1.0))));
  const double expo =
      sigma_sq * c.m / (noise.delta * (2.0 * prior.sigma0_sq + sigma_sq));
  const double tail = Kd * std::pow(nd, -c.m * Kd + 1.0) +
                      Kd * std::pow(nd, -expo + 1.0);
  return term1 + term2 +
         2.0 * std::sqrt(prior.sigma0_sq) *
             std::sqrt(2.0 * std::log(Kd)) * tail;
}

// UCBE failure bound 2nK exp(-(n-K)/(18H)).
inline double ucbe_upper_bound(std::uint64_t n, int K, double H) {
  if (n <= static_cast<std::uint64_t>(K) || !(H > 0.0))
    throw std::domain_error("ucbe_upper_bound: need n > K and H > 0");
  const double nd = static_cast<double>(n);
  return 2.0 * nd * static_cast<double>(K) *
         std::exp(-(nd - static_cast<double>(K)) / (18.0 * H));
}

// Upper-bound small-gap regime boundary sqrt(54 log n / n).
inline double small_gap_threshold(std::uint64_t n) {
  if (n < 2) throw std::domain_error("small_gap_threshold: need n >= 2");
  const double nd = static_cast<double>(n);
  return std::sqrt(54.0 * std::log(nd) / nd);
}

// Lower-bound variant sqrt(log n / (32 n)).
inline double small_gap_threshold_lower(std::uint64_t n) {
  if (n < 2) throw std::domain_error("small_gap_threshold_lower: need n >= 2");
  const double nd = static_cast<double>(n);
  return std::sqrt(std::log(nd) / (32.0 * nd));
}

// Exact two-arm full-information error: Pr(delta >= Delta) with
// delta ~ N(0, 2 sigma^2 / n).
inline double full_info_error_exact(std::uint64_t n, double gap,
                                    double sigma_sq) {
  if (n == 0 || !(gap >= 0.0) || !(sigma_sq > 0.0))
    throw std::domain_error("full_info_error_exact: bad input");
  const double z = gap * std::sqrt(static_cast<double>(n) / (2.0 * sigma_sq));
  return 1.0 - normal_cdf(z);
}

struct LowerBoundResult {
  double value = 0.0;
  bool vacuous = false;  // set when n Delta^2 / (2 sigma^2) <= 1
};

// Feller lower bound on the full-information error.
inline LowerBoundResult full_info_error_lower(std::uint64_t n, double gap,
                                              double sigma_sq) {
  if (n == 0 || !(gap > 0.0) || !(sigma_sq > 0.0))
    throw std::domain_error("full_info_error_lower: bad input");
  const double x = static_cast<double>(n) * gap * gap / (2.0 * sigma_sq);
  LowerBoundResult r;
  if (x < 1.0) {
    r.vacuous = true;
    return r;
  }
  r.value = (1.0 / std::sqrt(x) - 1.0 / (x * std::sqrt(x))) / kSqrt2Pi *
            std::exp(-x / 2.0);
  return r;
}

// The Bernoulli lower-bound hardness H2 is only pinned to an interval
// [H, log(2K) H]; both endpoints are reported.
struct H2Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline H2Interval h2_interval(double H, int K) {
  if (!(H > 0.0) || K < 2) throw std::domain_error("h2_interval: bad input");
  return {H, std::log(2.0 * static_cast<double>(K)) * H};
}

}  // namespace theory
}  // namespace rue
