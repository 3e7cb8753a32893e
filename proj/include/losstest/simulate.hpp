#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "losstest/core.hpp"
#include "losstest/hypothesis.hpp"
#include "losstest/parallel.hpp"
#include "losstest/rng.hpp"

namespace losstest {

enum class ScenarioFamily { cls_null_smooth, cls_alt_deterministic, reg_null_smooth, reg_alt_linear };

inline std::string to_string(ScenarioFamily f) {
  switch (f) {
    case ScenarioFamily::cls_null_smooth: return "cls_null_smooth";
    case ScenarioFamily::cls_alt_deterministic: return "cls_alt_deterministic";
    case ScenarioFamily::reg_null_smooth: return "reg_null_smooth";
    case ScenarioFamily::reg_alt_linear: return "reg_alt_linear";
  }
  return "unknown";
}

inline ScenarioFamily parse_family(const std::string& name) {
  for (auto f : {ScenarioFamily::cls_null_smooth, ScenarioFamily::cls_alt_deterministic,
                 ScenarioFamily::reg_null_smooth, ScenarioFamily::reg_alt_linear}) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorKind::scenario, "unknown scenario family '" + name + "'");
}

inline bool is_classification(ScenarioFamily f) {
  return f == ScenarioFamily::cls_null_smooth || f == ScenarioFamily::cls_alt_deterministic;
}

inline bool is_null(ScenarioFamily f) {
  return f == ScenarioFamily::cls_null_smooth || f == ScenarioFamily::reg_null_smooth;
}

/// Synthetic distribution of (X, Y) with X uniform on [0,1]^d.
///
/// With s = subset[0] and j = alt_feature (default: smallest index outside
/// the subset):
///   cls_null_smooth        P(Y = 1 | X) = (1 + beta cos(2 pi x_s)) / 2
///   cls_alt_deterministic  Y = sgn(x_j - 1/2)
///   reg_null_smooth        Y = sin(2 pi x_s) + tau eps
///   reg_alt_linear         Y = x_s + w x_j + tau eps
/// where eps is standard normal truncated to [-10, 10].
struct ScenarioSpec {
  ScenarioFamily family = ScenarioFamily::cls_null_smooth;
  std::size_t d = 2;
  FeatureSubset subset{{0}};
  double beta = 0.5;
  double tau = 0.3;
  double w = 3.0;
  std::optional<std::size_t> alt_feature;

  LabelKind task() const { return is_classification(family) ? LabelKind::classification : LabelKind::regression; }
  std::size_t signal_feature() const { return subset.indices()[0]; }

  std::size_t resolved_alt_feature() const {
    if (alt_feature) return *alt_feature;
    for (std::size_t j = 0; j < d; ++j) {
      if (!subset.contains(j)) return j;
    }
    throw Error(ErrorKind::scenario, "alternative needs a feature outside the subset");
  }

  void validate() const {
    if (d == 0) throw Error(ErrorKind::scenario, "d must be >= 1");
    subset.check_fits(d);
    switch (family) {
      case ScenarioFamily::cls_null_smooth:
        if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorKind::scenario, "beta must lie in [0, 1)");
        break;
      case ScenarioFamily::reg_null_smooth:
        if (!(tau > 0.0)) throw Error(ErrorKind::scenario, "tau must be > 0");
        break;
      case ScenarioFamily::cls_alt_deterministic:
      case ScenarioFamily::reg_alt_linear: {
        const std::size_t j = resolved_alt_feature();
        if (j >= d || subset.contains(j)) {
          throw Error(ErrorKind::scenario, "alternative feature " + std::to_string(j) + " must be outside the subset");
        }
        if (family == ScenarioFamily::reg_alt_linear && (!(tau >= 0.0) || w == 0.0)) {
          throw Error(ErrorKind::scenario, "reg_alt_linear needs tau >= 0 and w != 0");
        }
        break;
      }
    }
  }

  /// Known limit of T_n: E|m| - E|m^| for classification, E m^2 - E m^2 for
  /// regression. Zero under the null families.
  double analytic_limit() const {
    switch (family) {
      case ScenarioFamily::cls_alt_deterministic: return 1.0;
      case ScenarioFamily::reg_alt_linear: return w * w / 12.0;
      default: return 0.0;
    }
  }

  /// m(x) = E[Y | X = x].
  double conditional_mean(std::span<const double> x) const {
    const double xs = x[signal_feature()];
    switch (family) {
      case ScenarioFamily::cls_null_smooth: return beta * std::cos(2.0 * std::numbers::pi * xs);
      case ScenarioFamily::cls_alt_deterministic: return sgn(x[resolved_alt_feature()] - 0.5);
      case ScenarioFamily::reg_null_smooth: return std::sin(2.0 * std::numbers::pi * xs);
      case ScenarioFamily::reg_alt_linear: return xs + w * x[resolved_alt_feature()];
    }
    return 0.0;
  }

  /// m^(x_S) = E[Y | X_S = x_S]; `xs_subvector` is already projected.
  double projected_conditional_mean(std::span<const double> xs_subvector) const {
    const double xs = xs_subvector[0];
    switch (family) {
      case ScenarioFamily::cls_null_smooth: return beta * std::cos(2.0 * std::numbers::pi * xs);
      case ScenarioFamily::cls_alt_deterministic: return 0.0;
      case ScenarioFamily::reg_null_smooth: return std::sin(2.0 * std::numbers::pi * xs);
      case ScenarioFamily::reg_alt_linear: return xs + w * 0.5;
    }
    return 0.0;
  }
};

inline constexpr double kNoiseTruncation = 10.0;

/// total_n i.i.d. samples from the scenario, drawn sequentially from `rng`.
inline Dataset generate(const ScenarioSpec& spec, std::size_t total_n, const RngSpec& rng) {
  spec.validate();
  if (total_n < 4) throw Error(ErrorKind::too_few_samples, "generate needs total_n >= 4");
  Rng gen(rng);
  Matrix x(total_n, spec.d);
  std::vector<double> y(total_n);
  for (std::size_t i = 0; i < total_n; ++i) {
    auto row = x.row(i);
    for (double& v : row) v = gen.uniform();
    const double m = spec.conditional_mean(row);
    switch (spec.family) {
      case ScenarioFamily::cls_null_smooth: y[i] = gen.sign_with_probability((1.0 + m) / 2.0); break;
      case ScenarioFamily::cls_alt_deterministic: y[i] = m; break;
      case ScenarioFamily::reg_null_smooth:
      case ScenarioFamily::reg_alt_linear: y[i] = m + spec.tau * gen.truncated_normal(kNoiseTruncation); break;
    }
  }
  return Dataset(std::move(x), std::move(y), spec.task());
}

// ---------------------------------------------------------------------------
// Monte Carlo harness

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// 95% Wilson score interval for `successes` out of `trials`.
inline WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {};
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / t;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / t;
  const double center = (p + z2 / (2.0 * t)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;
  WilsonInterval wilson;
  double mean_statistic = 0.0;
  double mean_threshold = 0.0;
  std::vector<double> statistics;
};

struct ExperimentReport {
  ScenarioSpec scenario;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 0;
  RngSpec seeds{};
  std::vector<ExperimentRow> rows;
};

/// Stream for trial t at grid size n: (mix(master, n), t).
inline RngSpec trial_stream(const RngSpec& master, std::size_t n, std::size_t trial) {
  return {mix_key(master.master_seed, master.stream_id, n), trial};
}

/// For every n in the grid, `trials` independent generate -> run_test runs
/// with 2n samples each (n per half). Trials run in parallel into indexed
/// slots, so the report is identical for any thread count.
inline ExperimentReport run_experiment(const ScenarioSpec& spec, const std::vector<std::size_t>& n_grid,
                                       std::size_t trials, const RngSpec& rng, TestOptions options = {}) {
  spec.validate();
  if (trials == 0) throw Error(ErrorKind::domain, "trials must be >= 1");
  options.task = spec.task();
  ExperimentReport report{spec, n_grid, trials, rng, {}};
  for (std::size_t n : n_grid) {
    if (n < 4) throw Error(ErrorKind::too_few_samples, "grid sizes must be >= 4");
    std::vector<TestOutcome> outcomes(trials);
    parallel_for(trials, [&](std::size_t t) {
      const Dataset data = generate(spec, 2 * n, trial_stream(rng, n, t));
      outcomes[t] = run_test(data, TestConfig{spec.subset, options});
    });
    ExperimentRow row;
    row.n = n;
    row.k = outcomes.front().k_used;
    double stat_sum = 0.0;
    double thr_sum = 0.0;
    for (const auto& o : outcomes) {
      row.rejections += o.decision == Decision::reject_null ? 1 : 0;
      stat_sum += o.statistic;
      thr_sum += o.threshold;
      row.statistics.push_back(o.statistic);
    }
    const double t = static_cast<double>(trials);
    row.rejection_rate = static_cast<double>(row.rejections) / t;
    row.wilson = wilson_interval(row.rejections, trials);
    row.mean_statistic = stat_sum / t;
    row.mean_threshold = thr_sum / t;
    report.rows.push_back(std::move(row));
  }
  return report;
}

struct PowerPoint {
  std::size_t n = 0;
  double threshold = 0.0;
  double mean_statistic = 0.0;
  double analytic_limit = 0.0;
  double rejection_rate = 0.0;
  WilsonInterval wilson;
};

inline std::vector<PowerPoint> power_table(const ExperimentReport& report) {
  std::vector<PowerPoint> out;
  for (const auto& row : report.rows) {
    out.push_back({row.n, threshold(row.n, ThresholdVariant::standard), row.mean_statistic,
                   report.scenario.analytic_limit(), row.rejection_rate, row.wilson});
  }
  return out;
}

/// Plot-ready rows (n, a_n, mean T_n, limit, rejection rate, CI).
inline std::vector<PowerPoint> power_curve(const ScenarioSpec& spec, const std::vector<std::size_t>& n_grid,
                                           std::size_t trials, const RngSpec& rng, TestOptions options = {}) {
  return power_table(run_experiment(spec, n_grid, trials, rng, std::move(options)));
}

}  // namespace losstest
