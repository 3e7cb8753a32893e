#pragma once

// Command-line front end. Exit codes: 0 success / accept_null, 3 reject_null,
// 1 usage error, 2 data error.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "losstest/losstest.hpp"

namespace losstest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitReject = 3;

/// Thrown for malformed flag values that CLI11 cannot catch itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json manifest(const std::string& command, const std::optional<std::string>& input_path, json config,
                     std::uint64_t seed) {
  return {{"command", command},
          {"input_path", input_path ? json(*input_path) : json(nullptr)},
          {"config", std::move(config)},
          {"master_seed", seed},
          {"artifact_version", kArtifactVersion},
          {"schema_version", kReportSchemaVersion},
          {"timestamp", utc_timestamp()}};
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto trimmed = detail::trim(item);
    T value{};
    const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (trimmed.empty() || ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
      throw UsageError(std::string("bad ") + what + " entry '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

inline FeatureSubset parse_subset(const std::string& text) {
  try {
    return FeatureSubset(parse_list<std::size_t>(text, "subset"));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

/// Flags shared by `test` and `loco`.
struct TestFlags {
  std::string data;
  std::string task = "classify";
  std::uint64_t seed = 0;
  std::optional<std::size_t> k;
  std::string ties = "index";
  std::string variant = "paper";
  std::string threshold = "standard";
  std::string label;
  std::string label_coding = "pm1";
  bool shuffle = false;
  std::string out;

  void attach(CLI::App& app) {
    app.add_option("--data", data, "input CSV (header row, numeric columns)")->required();
    app.add_option("--task", task, "classify or regress")->check(CLI::IsMember({"classify", "regress"}));
    app.add_option("--seed", seed, "master seed for split shuffling and jitter");
    app.add_option("--k", k, "neighbor count override");
    app.add_option("--ties", ties, "tie policy")->check(CLI::IsMember({"index", "jitter"}));
    app.add_option("--variant", variant, "statistic")->check(CLI::IsMember({"paper", "baseline"}));
    app.add_option("--threshold", threshold, "threshold")->check(CLI::IsMember({"standard", "strong"}));
    app.add_option("--label", label, "label column name or 0-based position (default: last column)");
    app.add_option("--label-coding", label_coding, "classification label coding")
        ->check(CLI::IsMember({"pm1", "zero_one"}));
    app.add_flag("--shuffle", shuffle, "shuffle rows (seeded) before splitting");
    app.add_option("--out", out, "also write the JSON report here");
  }

  LabelKind kind() const { return task == "regress" ? LabelKind::regression : LabelKind::classification; }

  TestOptions options() const {
    TestOptions o;
    o.task = kind();
    o.tie_policy = ties == "jitter" ? TiePolicy::jitter({seed, 1}) : TiePolicy::index_order();
    o.k_override = k;
    o.threshold_variant = threshold == "strong" ? ThresholdVariant::strong : ThresholdVariant::standard;
    o.statistic_variant = variant == "baseline" ? StatisticVariant::baseline_1nn : StatisticVariant::paper;
    o.split = SplitOptions{shuffle, {seed, 0}};
    return o;
  }

  IngestResult load() const {
    CsvOptions csv;
    csv.task = kind();
    csv.label_coding = label_coding == "zero_one" ? LabelCoding::zero_one : LabelCoding::pm1;
    if (!label.empty()) {
      std::size_t pos = 0;
      const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), pos);
      if (ec == std::errc{} && ptr == label.data() + label.size()) {
        csv.label_column = pos;
      } else {
        csv.label_column = label;
      }
    }
    return ingest_csv(data, csv);
  }

  json config_json(const IngestResult& in) const {
    json c = to_json(options());
    c["label_column"] = in.label_name;
    c["label_coding"] = label_coding;
    c["labels_remapped"] = in.labels_remapped;
    return c;
  }
};

inline void emit(std::ostream& out, const std::string& path, const json& report) {
  const std::string text = report.dump(2) + "\n";
  if (!path.empty()) write_file_atomic(path, text);
  out << text;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Nearest-neighbor tests for lossless feature subsets", "losstest"};
  app.require_subcommand(1);

  TestFlags test_flags;
  std::string subset_text;
  auto* test_cmd = app.add_subcommand("test", "test whether a feature subset is lossless");
  test_flags.attach(*test_cmd);
  test_cmd->add_option("--subset", subset_text, "0-based comma-separated feature indices")->required();

  TestFlags loco_flags;
  auto* loco_cmd = app.add_subcommand("loco", "test every leave-one-covariate-out subset");
  loco_flags.attach(*loco_cmd);

  std::size_t n_max = 200;
  std::string a_grid = "0";
  std::string mad_out;
  auto* mad_cmd = app.add_subcommand("mad", "exact mean-absolute-deviation table and bound validity map");
  mad_cmd->add_option("--n-max", n_max, "largest n");
  mad_cmd->add_option("--a-grid", a_grid, "comma-separated means in [-1, 1]");
  mad_cmd->add_option("--out", mad_out, "write the CSV here");

  std::string scenario;
  std::string n_grid = "1000";
  std::size_t trials = 100;
  std::uint64_t sim_seed = 0;
  std::size_t dim = 2;
  std::string sim_subset = "0";
  double beta = 0.5, tau = 0.3, w = 3.0;
  std::optional<std::size_t> alt_feature;
  std::string sim_out, sim_csv, sim_trials_csv;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rejection rates for a synthetic scenario");
  const auto families = CLI::IsMember(
      {"cls_null_smooth", "cls_alt_deterministic", "reg_null_smooth", "reg_alt_linear"});
  sim_cmd->add_option("--scenario", scenario, "scenario family")->required()->check(families);
  sim_cmd->add_option("--n-grid", n_grid, "comma-separated per-half sample sizes");
  sim_cmd->add_option("--trials", trials, "trials per grid point");
  sim_cmd->add_option("--seed", sim_seed, "master seed");
  sim_cmd->add_option("--d", dim, "feature dimension");
  sim_cmd->add_option("--subset", sim_subset, "0-based feature subset under test");
  sim_cmd->add_option("--beta", beta, "signal amplitude (cls_null_smooth)");
  sim_cmd->add_option("--tau", tau, "noise level (regression)");
  sim_cmd->add_option("--w", w, "alternative weight (reg_alt_linear)");
  sim_cmd->add_option("--alt-feature", alt_feature, "feature driving the alternative");
  sim_cmd->add_option("--out", sim_out, "write the JSON report here");
  sim_cmd->add_option("--csv", sim_csv, "write the aggregate power table here");
  sim_cmd->add_option("--trials-csv", sim_trials_csv, "write one row per (n, trial) here");

  std::size_t gen_n = 2000;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic dataset as CSV");
  gen_cmd->add_option("--scenario", scenario, "scenario family")->required()->check(families);
  gen_cmd->add_option("--n", gen_n, "total rows");
  gen_cmd->add_option("--seed", sim_seed, "seed");
  gen_cmd->add_option("--d", dim, "feature dimension");
  gen_cmd->add_option("--subset", sim_subset, "subset the scenario is built around");
  gen_cmd->add_option("--beta", beta, "signal amplitude (cls_null_smooth)");
  gen_cmd->add_option("--tau", tau, "noise level (regression)");
  gen_cmd->add_option("--w", w, "alternative weight (reg_alt_linear)");
  gen_cmd->add_option("--alt-feature", alt_feature, "feature driving the alternative");
  gen_cmd->add_option("--out", gen_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const auto scenario_spec = [&] {
    ScenarioSpec s;
    s.family = parse_family(scenario);
    s.d = dim;
    s.subset = parse_subset(sim_subset);
    s.beta = beta;
    s.tau = tau;
    s.w = w;
    s.alt_feature = alt_feature;
    return s;
  };

  try {
    if (*test_cmd) {
      const FeatureSubset subset = parse_subset(subset_text);
      const IngestResult in = test_flags.load();
      const TestOutcome outcome = run_test(in.data, TestConfig{subset, test_flags.options()});
      json report = to_json(outcome);
      json config = test_flags.config_json(in);
      config["subset"] = subset_json(subset);
      report["manifest"] = manifest("test", test_flags.data, config, test_flags.seed);
      emit(out, test_flags.out, report);
      return outcome.decision == Decision::accept_null ? kExitOk : kExitReject;
    }
    if (*loco_cmd) {
      const IngestResult in = loco_flags.load();
      const auto entries = loco_scan(in.data, loco_flags.options());
      const json m = manifest("loco", loco_flags.data, loco_flags.config_json(in), loco_flags.seed);
      json report = json::array();
      for (const auto& e : entries) {
        json item = to_json(e.outcome);
        item["left_out"] = e.left_out;
        item["manifest"] = m;
        report.push_back(std::move(item));
      }
      emit(out, loco_flags.out, report);
      return kExitOk;
    }
    if (*mad_cmd) {
      const auto grid = parse_list<double>(a_grid, "a-grid");
      const auto rows = mad_validity_map(n_max, grid);
      const std::string csv = mad_csv(rows);
      if (!mad_out.empty()) write_file_atomic(mad_out, csv);
      out << csv;
      return kExitOk;
    }
    if (*sim_cmd) {
      const ScenarioSpec spec = scenario_spec();
      const auto grid = parse_list<std::size_t>(n_grid, "n-grid");
      const ExperimentReport report = run_experiment(spec, grid, trials, RngSpec{sim_seed, 0});
      json j = to_json(report);
      j["manifest"] = manifest("simulate", std::nullopt, to_json(spec), sim_seed);
      const auto table = power_table(report);
      if (!sim_csv.empty()) write_file_atomic(sim_csv, power_csv(table));
      if (!sim_trials_csv.empty()) write_file_atomic(sim_trials_csv, trials_csv(report));
      emit(out, sim_out, j);
      return kExitOk;
    }
    if (*gen_cmd) {
      const Dataset data = generate(scenario_spec(), gen_n, RngSpec{sim_seed, 0});
      write_file_atomic(gen_out, to_csv_string(data));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace losstest::cli
