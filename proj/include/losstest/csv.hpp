#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "losstest/core.hpp"

namespace losstest {

enum class LabelCoding { pm1, zero_one };

struct CsvOptions {
  /// Column name or 0-based position; the last column when empty.
  std::optional<std::variant<std::string, std::size_t>> label_column;
  LabelCoding label_coding = LabelCoding::pm1;
  LabelKind task = LabelKind::classification;
};

struct IngestResult {
  Dataset data;
  std::vector<std::string> feature_names;
  std::string label_name;
  /// Labels were given as {0, 1} and mapped to {-1, +1}.
  bool labels_remapped = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

inline double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
  double value = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::parse, "row " + std::to_string(row) + ", column '" + std::string(column) + "': '" +
                                      std::string(cell) + "' is not a finite number");
  }
  return value;
}

}  // namespace detail

/// Reads a headed, comma-separated table. Row numbers in messages are 1-based
/// data rows (the header is row 0).
inline IngestResult ingest_csv(std::istream& in, const CsvOptions& options = {}) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::schema, "empty input: header row required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header;
  for (auto f : detail::split_fields(line)) header.emplace_back(f);
  if (header.size() < 2) throw Error(ErrorKind::schema, "need at least one feature column and a label column");

  std::size_t label_col = header.size() - 1;
  if (options.label_column) {
    if (const auto* name = std::get_if<std::string>(&*options.label_column)) {
      auto it = std::find(header.begin(), header.end(), *name);
      if (it == header.end()) throw Error(ErrorKind::schema, "no column named '" + *name + "'");
      label_col = static_cast<std::size_t>(it - header.begin());
    } else {
      label_col = std::get<std::size_t>(*options.label_column);
      if (label_col >= header.size()) {
        throw Error(ErrorKind::schema, "label column " + std::to_string(label_col) + " out of range");
      }
    }
  }

  const std::size_t d = header.size() - 1;
  std::vector<double> features;
  std::vector<double> labels;
  bool remapped = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::parse, "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                        " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = detail::parse_cell(fields[c], row, header[c]);
      if (c != label_col) {
        features.push_back(v);
        continue;
      }
      double y = v;
      if (options.task == LabelKind::classification) {
        if (options.label_coding == LabelCoding::zero_one) {
          if (v != 0.0 && v != 1.0) {
            throw Error(ErrorKind::label, "row " + std::to_string(row) + ": label " + std::string(fields[c]) +
                                              " is not 0 or 1");
          }
          y = v == 0.0 ? -1.0 : 1.0;
          remapped = true;
        } else if (v != -1.0 && v != 1.0) {
          throw Error(ErrorKind::label, "row " + std::to_string(row) + ": label " + std::string(fields[c]) +
                                            " is not -1 or 1 (use 0/1 coding explicitly if intended)");
        }
      }
      labels.push_back(y);
    }
  }
  if (row == 0) throw Error(ErrorKind::schema, "no data rows");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) names.push_back(header[c]);
  }
  return IngestResult{Dataset(Matrix(row, d, std::move(features)), std::move(labels), options.task),
                      std::move(names), header[label_col], remapped};
}

inline IngestResult ingest_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  return ingest_csv(in, options);
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Writes features as x0..x{d-1} followed by y.
inline void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << format_double(v) << ',';
    out << format_double(data.label(i)) << '\n';
  }
}

inline std::string to_csv_string(const Dataset& data) {
  std::ostringstream out;
  write_csv(out, data);
  return out.str();
}

}  // namespace losstest
