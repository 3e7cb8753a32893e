#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "losstest/csv.hpp"
#include "losstest/hypothesis.hpp"
#include "losstest/madlemma.hpp"
#include "losstest/simulate.hpp"

namespace losstest {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

using nlohmann::json;

inline json to_json(const RngSpec& s) { return {{"master_seed", s.master_seed}, {"stream_id", s.stream_id}}; }

inline json to_json(const TiePolicy& p) {
  json j{{"mode", to_string(p.mode)}};
  if (p.uses_jitter()) j["jitter_seed"] = to_json(p.jitter_seed);
  return j;
}

inline json subset_json(const FeatureSubset& s) {
  return json(std::vector<std::size_t>(s.indices().begin(), s.indices().end()));
}

inline json to_json(const TestOptions& o) {
  json j{{"task", to_string(o.task)},
         {"ties", to_json(o.tie_policy)},
         {"threshold_variant", to_string(o.threshold_variant)},
         {"statistic_variant", to_string(o.statistic_variant)},
         {"shuffle", o.split.shuffle},
         {"split_seed", to_json(o.split.seed)}};
  j["k_override"] = o.k_override ? json(*o.k_override) : json(nullptr);
  return j;
}

inline json to_json(const TestOutcome& o) {
  return {{"statistic", o.statistic},
          {"threshold", o.threshold},
          {"k", o.k_used},
          {"n_eval", o.n_eval},
          {"decision", to_string(o.decision)},
          {"tie_count", o.tie_count},
          {"dropped_last_row", o.dropped_last_row},
          {"subset", subset_json(o.subset)},
          {"config", to_json(o.options)}};
}

inline json to_json(const ScenarioSpec& s) {
  json j{{"family", to_string(s.family)}, {"d", s.d},        {"subset", subset_json(s.subset)},
         {"beta", s.beta},                {"tau", s.tau},    {"w", s.w},
         {"analytic_limit", s.analytic_limit()}};
  if (s.family == ScenarioFamily::cls_alt_deterministic || s.family == ScenarioFamily::reg_alt_linear) {
    j["alt_feature"] = s.resolved_alt_feature();
  }
  return j;
}

inline json to_json(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"k", row.k},
                    {"rejections", row.rejections},
                    {"rejection_rate", row.rejection_rate},
                    {"wilson_ci", {row.wilson.lo, row.wilson.hi}},
                    {"mean_statistic", row.mean_statistic},
                    {"mean_threshold", row.mean_threshold}});
  }
  return {{"scenario", to_json(r.scenario)},
          {"n_grid", r.n_grid},
          {"trials", r.trials},
          {"seeds", to_json(r.seeds)},
          {"rows", rows}};
}

/// n,a,exact,lower_bound,lower_ok,upper_ratio; upper_ratio is "undefined"
/// when sigma = 0.
inline std::string mad_csv(std::span<const MadReport> rows) {
  std::ostringstream out;
  out << "n,a,exact,lower_bound,lower_ok,upper_ratio\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.a) << ',' << format_double(r.exact) << ','
        << format_double(r.lower_bound) << ',' << (r.lower_ok ? "true" : "false") << ','
        << (r.upper_ratio ? format_double(*r.upper_ratio) : std::string("undefined")) << '\n';
  }
  return out.str();
}

/// Aggregate power table, one row per grid size.
inline std::string power_csv(std::span<const PowerPoint> points) {
  std::ostringstream out;
  out << "n,threshold,mean_statistic,analytic_limit,rejection_rate,ci_lo,ci_hi\n";
  for (const auto& p : points) {
    out << p.n << ',' << format_double(p.threshold) << ',' << format_double(p.mean_statistic) << ','
        << format_double(p.analytic_limit) << ',' << format_double(p.rejection_rate) << ','
        << format_double(p.wilson.lo) << ',' << format_double(p.wilson.hi) << '\n';
  }
  return out.str();
}

/// One row per (n, trial).
inline std::string trials_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "n,trial,statistic,threshold,reject\n";
  for (const auto& row : r.rows) {
    for (std::size_t t = 0; t < row.statistics.size(); ++t) {
      out << row.n << ',' << t << ',' << format_double(row.statistics[t]) << ',' << format_double(row.mean_threshold)
          << ',' << (row.statistics[t] > row.mean_threshold ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

/// Writes through a sibling temporary and renames, so a failed run never
/// leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace losstest
