#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "losstest/error.hpp"

// Mean absolute value of an average of n i.i.d. +-1 variables with mean a,
//
//   E | (1/n) sum Z_i | = sum_j |2j - n|/n C(n,j) p^j (1-p)^(n-j),  p = (a+1)/2,
//
// computed exactly (up to rounding), together with the two-sided bound
// |a| + c n^{-3/2} sigma^n, sigma^2 = 1 - a^2, that brackets it.

namespace losstest {

inline constexpr std::size_t kMadMaxN = 10'000;

namespace detail {

inline void check_mad_domain(std::size_t n, double a) {
  if (n == 0 || n > kMadMaxN) {
    throw Error(ErrorKind::domain, "n must lie in [1, " + std::to_string(kMadMaxN) + "], got " + std::to_string(n));
  }
  if (!(std::abs(a) <= 1.0)) throw Error(ErrorKind::domain, "|a| must be <= 1");
}

inline double log_sum_exp(std::span<const double> values) {
  const double top = *std::max_element(values.begin(), values.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

/// log P{B(n,p) = j} for j = 0..n, 0 < p < 1. Log weights are accumulated
/// outward from the mode by ratio recurrence and normalized with a
/// log-sum-exp, which keeps far tails meaningful after exp() underflows.
inline std::vector<double> binomial_log_pmf(std::size_t n, double p) {
  const double log_odds = std::log(p) - std::log1p(-p);
  const auto mode = std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n + 1) * p)));
  std::vector<double> logw(n + 1, 0.0);
  for (std::size_t j = mode; j < n; ++j) {
    logw[j + 1] = logw[j] + std::log(static_cast<double>(n - j) / static_cast<double>(j + 1)) + log_odds;
  }
  for (std::size_t j = mode; j > 0; --j) {
    logw[j - 1] = logw[j] - std::log(static_cast<double>(n - j + 1) / static_cast<double>(j)) - log_odds;
  }
  const double log_z = log_sum_exp(logw);
  for (double& v : logw) v -= log_z;
  return logw;
}

/// P{Z = +1} folded onto the lower half; |sum Z| has the same law for p and 1-p.
inline double folded_p(double a) { return (1.0 - std::abs(a)) / 2.0; }

}  // namespace detail

/// E|(1/n) sum Z_i| by exact summation over the binomial law.
inline double mad_exact(std::size_t n, double a) {
  detail::check_mad_domain(n, a);
  if (std::abs(a) == 1.0) return 1.0;
  const auto log_pmf = detail::binomial_log_pmf(n, detail::folded_p(a));
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double dev = std::abs(2.0 * static_cast<double>(j) - nn);
    sum += dev * std::exp(log_pmf[j]);
  }
  return sum / nn;
}

/// 2 E[(2B(n,p) - n)^+] / n with p = min(p, 1-p): the excess of the mean
/// absolute value over |a|.
inline double mad_plus_part(std::size_t n, double a) {
  detail::check_mad_domain(n, a);
  if (std::abs(a) == 1.0) return 0.0;
  const auto log_pmf = detail::binomial_log_pmf(n, detail::folded_p(a));
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t j = n / 2 + 1; j <= n; ++j) {
    sum += (2.0 * static_cast<double>(j) - nn) * std::exp(log_pmf[j]);
  }
  return 2.0 * sum / nn;
}

/// log of mad_plus_part, accurate when the value itself underflows.
inline double mad_log_plus_part(std::size_t n, double a) {
  detail::check_mad_domain(n, a);
  if (std::abs(a) == 1.0) return -std::numeric_limits<double>::infinity();
  const auto log_pmf = detail::binomial_log_pmf(n, detail::folded_p(a));
  const double nn = static_cast<double>(n);
  std::vector<double> terms;
  for (std::size_t j = n / 2 + 1; j <= n; ++j) {
    terms.push_back(std::log(2.0 * static_cast<double>(j) - nn) + log_pmf[j]);
  }
  return std::log(2.0 / nn) + detail::log_sum_exp(terms);
}

/// |a| + sqrt(2) n^{-3/2} (1 - a^2)^{n/2}.
inline double mad_lower_bound(std::size_t n, double a) {
  detail::check_mad_domain(n, a);
  const double nn = static_cast<double>(n);
  return std::abs(a) + std::sqrt(2.0) * std::pow(nn, -1.5) * std::pow(1.0 - a * a, nn / 2.0);
}

/// Both sides of E|avg Z| = 2E[(2B(n,p) - n)^+ / n] + |a|.
struct MadIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline MadIdentity mad_identity_check(std::size_t n, double a) {
  return {mad_exact(n, a), std::abs(a) + mad_plus_part(n, a)};
}

inline constexpr double kMadTolerance = 1e-12;

struct MadReport {
  std::size_t n = 0;
  double a = 0.0;
  double exact = 0.0;
  double lower_bound = 0.0;
  double bound_gap = 0.0;
  double plus_part = 0.0;
  bool lower_ok = false;
  /// (exact - |a|) n^{3/2} / sigma^n, the constant the upper bound would
  /// need at this point; empty when sigma = 0.
  std::optional<double> upper_ratio;
};

inline MadReport mad_report(std::size_t n, double a) {
  MadReport r;
  r.n = n;
  r.a = a;
  r.exact = mad_exact(n, a);
  r.lower_bound = mad_lower_bound(n, a);
  r.bound_gap = r.exact - r.lower_bound;
  r.plus_part = mad_plus_part(n, a);
  r.lower_ok = r.exact >= r.lower_bound - kMadTolerance;
  if (std::abs(a) < 1.0) {
    const double nn = static_cast<double>(n);
    const double log_sigma = 0.5 * std::log1p(-a * a);
    r.upper_ratio = std::exp(mad_log_plus_part(n, a) + 1.5 * std::log(nn) - nn * log_sigma);
  }
  return r;
}

inline constexpr std::size_t kMadMapMaxN = 1000;

/// Reports for every n in [1, n_max] and every a in the grid, grouped by a.
inline std::vector<MadReport> mad_validity_map(std::size_t n_max, std::span<const double> a_grid) {
  if (n_max == 0 || n_max > kMadMapMaxN) {
    throw Error(ErrorKind::domain, "n_max must lie in [1, " + std::to_string(kMadMapMaxN) + "]");
  }
  std::vector<MadReport> rows;
  rows.reserve(n_max * a_grid.size());
  for (double a : a_grid) {
    for (std::size_t n = 1; n <= n_max; ++n) rows.push_back(mad_report(n, a));
  }
  return rows;
}

/// Smallest N0 such that lower_ok holds for every row with N0 <= n, among
/// rows for the given a. Empty if the largest n fails.
inline std::optional<std::size_t> lower_bound_onset(std::span<const MadReport> rows, double a) {
  std::size_t n_max = 0;
  std::size_t last_failure = 0;
  for (const auto& r : rows) {
    if (r.a != a) continue;
    n_max = std::max(n_max, r.n);
    if (!r.lower_ok) last_failure = std::max(last_failure, r.n);
  }
  if (n_max == 0 || last_failure == n_max) return std::nullopt;
  return last_failure + 1;
}

}  // namespace losstest
