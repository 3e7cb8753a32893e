#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "losstest/core.hpp"
#include "losstest/knn.hpp"
#include "losstest/parallel.hpp"

namespace losstest {

// ---------------------------------------------------------------------------
// Tuning formulas. All logarithms are natural.

inline void require_n_at_least_2(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::domain, "n must be >= 2, got " + std::to_string(n));
}

/// k_n = max(1, floor(sqrt(ln n))) for the classification statistic.
inline std::size_t k_classification(std::size_t n) {
  require_n_at_least_2(n);
  const auto k = static_cast<std::size_t>(std::floor(std::sqrt(std::log(static_cast<double>(n)))));
  return std::max<std::size_t>(1, k);
}

/// k_n = max(1, floor(ln n)) for the regression statistic.
inline std::size_t k_regression(std::size_t n) {
  require_n_at_least_2(n);
  const auto k = static_cast<std::size_t>(std::floor(std::log(static_cast<double>(n))));
  return std::max<std::size_t>(1, k);
}

enum class ThresholdVariant { standard, strong };

/// a_n = ln(n)/sqrt(n), or (ln n)^2/sqrt(n) for the strongly consistent variant.
inline double threshold(std::size_t n, ThresholdVariant variant = ThresholdVariant::standard) {
  require_n_at_least_2(n);
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  const double scale = variant == ThresholdVariant::strong ? log_n * log_n : log_n;
  return scale / std::sqrt(nn);
}

/// Dimension-dependent threshold of the 1-NN baseline: ln(n)(n^-1/2 + n^-1/d).
inline double baseline_threshold(std::size_t n, std::size_t d) {
  require_n_at_least_2(n);
  if (d == 0) throw Error(ErrorKind::domain, "d must be >= 1");
  const double nn = static_cast<double>(n);
  return std::log(nn) * (1.0 / std::sqrt(nn) + std::pow(nn, -1.0 / static_cast<double>(d)));
}

// ---------------------------------------------------------------------------
// Statistics

enum class StatisticVariant { paper, baseline_1nn };

struct StatisticValue {
  double value = 0.0;
  /// Searches (full and projected, over all evaluation rows) whose neighbor
  /// set was decided by the tie rule.
  std::size_t tie_count = 0;
};

namespace detail {

/// Full-space and S-projected neighbor indices over one train half, with the
/// jitter column (if any) shared between both views of each sample.
class SplitNeighbors {
 public:
  SplitNeighbors(const SplitPair& split, const FeatureSubset& subset, const TiePolicy& policy)
      : full_(prepare_train(split.train.features(), policy)),
        projected_(prepare_train(project(split.train.features(), subset), policy)),
        eval_full_(prepare_eval(split.eval.features(), policy)),
        eval_projected_(prepare_projected_eval(split.eval.features(), subset, policy)) {}

  const NeighborIndex& full() const noexcept { return full_; }
  const NeighborIndex& projected() const noexcept { return projected_; }
  std::span<const double> eval_full(std::size_t i) const noexcept { return eval_full_.row(i); }
  std::span<const double> eval_projected(std::size_t i) const noexcept { return eval_projected_.row(i); }

 private:
  static Matrix prepare_train(const Matrix& x, const TiePolicy& policy) {
    if (!policy.uses_jitter()) return x;
    return with_aux(x, train_jitter(policy, x.rows()));
  }

  static std::vector<double> eval_aux(const Matrix& full, const TiePolicy& policy) {
    std::vector<double> aux(full.rows());
    for (std::size_t i = 0; i < full.rows(); ++i) aux[i] = query_jitter(policy, full.row(i));
    return aux;
  }

  static Matrix prepare_eval(const Matrix& full, const TiePolicy& policy) {
    if (!policy.uses_jitter()) return full;
    return with_aux(full, eval_aux(full, policy));
  }

  static Matrix prepare_projected_eval(const Matrix& full, const FeatureSubset& subset, const TiePolicy& policy) {
    Matrix projected = project(full, subset);
    if (!policy.uses_jitter()) return projected;
    return with_aux(projected, eval_aux(full, policy));
  }

  NeighborIndex full_;
  NeighborIndex projected_;
  Matrix eval_full_;
  Matrix eval_projected_;
};

inline void check_split(const SplitPair& split, const FeatureSubset& subset, std::size_t k) {
  subset.check_fits(split.train.dim());
  if (split.eval.dim() != split.train.dim()) throw Error(ErrorKind::shape, "train/eval dimension mismatch");
  if (k == 0 || k > split.train.size()) {
    throw Error(ErrorKind::insufficient_neighbors,
                "k = " + std::to_string(k) + " with " + std::to_string(split.train.size()) + " training rows");
  }
}

inline void check_task(const SplitPair& split, LabelKind expected) {
  if (split.train.kind() != expected || split.eval.kind() != expected) {
    throw Error(ErrorKind::task_mismatch, "statistic needs " + to_string(expected) + " data");
  }
}

/// Averages term(i, full neighbors, projected neighbors) over the evaluation
/// half. Terms land in indexed slots and are summed in index order, so the
/// result does not depend on the thread count.
template <typename Term>
StatisticValue average_over_eval(const SplitPair& split, const FeatureSubset& subset, std::size_t k,
                                 const TiePolicy& policy, Term&& term) {
  const SplitNeighbors neighbors(split, subset, policy);
  const std::size_t n = split.eval.size();
  std::vector<double> terms(n);
  std::vector<unsigned char> ties(n);
  parallel_for(n, [&](std::size_t i) {
    const NeighborList full = neighbors.full().nearest(neighbors.eval_full(i), k);
    const NeighborList proj = neighbors.projected().nearest(neighbors.eval_projected(i), k);
    terms[i] = term(i, full, proj);
    ties[i] = static_cast<unsigned char>(full.boundary_tie) + static_cast<unsigned char>(proj.boundary_tie);
  });
  StatisticValue out;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += terms[i];
    out.tie_count += ties[i];
  }
  out.value = sum / static_cast<double>(n);
  return out;
}

}  // namespace detail

/// T_n = (1/n) sum_i ( Y'_i sgn(m_n(X'_i)) - |m^_n(X^'_i)| ).
inline StatisticValue classification_statistic_detail(const SplitPair& split, const FeatureSubset& subset,
                                                      std::size_t k, const TiePolicy& policy = {}) {
  detail::check_task(split, LabelKind::classification);
  detail::check_split(split, subset, k);
  return detail::average_over_eval(split, subset, k, policy,
                                   [&](std::size_t i, const NeighborList& full, const NeighborList& proj) {
                                     const double m_full = mean_label(split.train, full);
                                     const double m_proj = mean_label(split.train, proj);
                                     return split.eval.label(i) * sgn(m_full) - std::abs(m_proj);
                                   });
}

inline double classification_statistic(const SplitPair& split, const FeatureSubset& subset, std::size_t k,
                                       const TiePolicy& policy = {}) {
  return classification_statistic_detail(split, subset, k, policy).value;
}

/// T_n = (1/n) sum_i ( Y'_i m_n(X'_i) - m^_n(X^'_i)^2 ).
inline StatisticValue regression_statistic_detail(const SplitPair& split, const FeatureSubset& subset,
                                                  std::size_t k, const TiePolicy& policy = {}) {
  detail::check_task(split, LabelKind::regression);
  detail::check_split(split, subset, k);
  return detail::average_over_eval(split, subset, k, policy,
                                   [&](std::size_t i, const NeighborList& full, const NeighborList& proj) {
                                     const double m_full = mean_label(split.train, full);
                                     const double m_proj = mean_label(split.train, proj);
                                     return split.eval.label(i) * m_full - m_proj * m_proj;
                                   });
}

inline double regression_statistic(const SplitPair& split, const FeatureSubset& subset, std::size_t k,
                                   const TiePolicy& policy = {}) {
  return regression_statistic_detail(split, subset, k, policy).value;
}

/// 1-NN baseline: (1/n) sum_i Y'_i ( Y_(1)(X'_i) - Y^_(1)(X^'_i) ). Works for
/// either label kind.
inline StatisticValue baseline_1nn_statistic_detail(const SplitPair& split, const FeatureSubset& subset,
                                                    const TiePolicy& policy = {}) {
  detail::check_split(split, subset, 1);
  if (split.train.kind() != split.eval.kind()) throw Error(ErrorKind::task_mismatch, "mixed label kinds");
  return detail::average_over_eval(split, subset, 1, policy,
                                   [&](std::size_t i, const NeighborList& full, const NeighborList& proj) {
                                     return split.eval.label(i) *
                                            (split.train.label(full.indices[0]) - split.train.label(proj.indices[0]));
                                   });
}

inline double baseline_1nn_statistic(const SplitPair& split, const FeatureSubset& subset,
                                     const TiePolicy& policy = {}) {
  return baseline_1nn_statistic_detail(split, subset, policy).value;
}

// ---------------------------------------------------------------------------
// Decisions

enum class Decision { accept_null, reject_null };

inline std::string to_string(Decision d) { return d == Decision::accept_null ? "accept_null" : "reject_null"; }
inline std::string to_string(ThresholdVariant v) { return v == ThresholdVariant::strong ? "strong" : "standard"; }
inline std::string to_string(StatisticVariant v) { return v == StatisticVariant::baseline_1nn ? "baseline" : "paper"; }

/// Accept iff statistic <= threshold (boundary accepts).
constexpr Decision decide(double statistic, double threshold_value) noexcept {
  return statistic <= threshold_value ? Decision::accept_null : Decision::reject_null;
}

/// Everything except the subset under test.
struct TestOptions {
  LabelKind task = LabelKind::classification;
  TiePolicy tie_policy{};
  std::optional<std::size_t> k_override;
  ThresholdVariant threshold_variant = ThresholdVariant::standard;
  StatisticVariant statistic_variant = StatisticVariant::paper;
  SplitOptions split{};
};

struct TestConfig {
  FeatureSubset subset;
  TestOptions options{};
};

struct TestOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t k_used = 0;
  std::size_t n_eval = 0;
  Decision decision = Decision::accept_null;
  std::size_t tie_count = 0;
  bool dropped_last_row = false;
  FeatureSubset subset{{0}};
  TestOptions options{};

  friend bool operator==(const TestOutcome& a, const TestOutcome& b) {
    return a.statistic == b.statistic && a.threshold == b.threshold && a.k_used == b.k_used &&
           a.n_eval == b.n_eval && a.decision == b.decision && a.tie_count == b.tie_count &&
           a.dropped_last_row == b.dropped_last_row && a.subset == b.subset;
  }
};

/// k used by the configured statistic on a train half of size n.
inline std::size_t resolve_k(const TestOptions& options, std::size_t n) {
  if (options.statistic_variant == StatisticVariant::baseline_1nn) return 1;
  if (options.k_override) {
    if (*options.k_override == 0 || *options.k_override > n) {
      throw Error(ErrorKind::insufficient_neighbors, "k override " + std::to_string(*options.k_override) +
                                                         " outside [1, " + std::to_string(n) + "]");
    }
    return *options.k_override;
  }
  return options.task == LabelKind::classification ? k_classification(n) : k_regression(n);
}

/// Split, compute the configured statistic and threshold, decide.
inline TestOutcome run_test(const Dataset& data, const TestConfig& config) {
  const TestOptions& opt = config.options;
  if (data.kind() != opt.task) {
    throw Error(ErrorKind::task_mismatch,
                "configured for " + to_string(opt.task) + " but data is " + to_string(data.kind()));
  }
  config.subset.check_fits(data.dim());
  const SplitPair halves = split(data, opt.split);
  const std::size_t n = halves.train.size();
  const std::size_t k = resolve_k(opt, n);

  StatisticValue stat;
  double thr = 0.0;
  if (opt.statistic_variant == StatisticVariant::baseline_1nn) {
    stat = baseline_1nn_statistic_detail(halves, config.subset, opt.tie_policy);
    thr = baseline_threshold(n, data.dim());
  } else {
    stat = opt.task == LabelKind::classification
               ? classification_statistic_detail(halves, config.subset, k, opt.tie_policy)
               : regression_statistic_detail(halves, config.subset, k, opt.tie_policy);
    thr = threshold(n, opt.threshold_variant);
  }

  TestOutcome out;
  out.statistic = stat.value;
  out.threshold = thr;
  out.k_used = k;
  out.n_eval = halves.eval.size();
  out.decision = decide(stat.value, thr);
  out.tie_count = stat.tie_count;
  out.dropped_last_row = halves.dropped_last_row;
  out.subset = config.subset;
  out.options = opt;
  return out;
}

struct LocoEntry {
  std::size_t left_out = 0;
  TestOutcome outcome;
};

/// Leave-one-covariate-out: tests S = {all features} \ {j} for every j with
/// the same split and seeds.
inline std::vector<LocoEntry> loco_scan(const Dataset& data, const TestOptions& options) {
  if (data.dim() < 2) throw Error(ErrorKind::invalid_subset, "LOCO needs d >= 2: nothing to leave out");
  std::vector<LocoEntry> out;
  out.reserve(data.dim());
  for (std::size_t j = 0; j < data.dim(); ++j) {
    out.push_back({j, run_test(data, TestConfig{FeatureSubset::all_but(data.dim(), j), options})});
  }
  return out;
}

}  // namespace losstest
