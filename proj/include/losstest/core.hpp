#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "losstest/error.hpp"
#include "losstest/rng.hpp"

namespace losstest {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw Error(ErrorKind::shape, "matrix value count " + std::to_string(values_.size()) +
                                        " does not match " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
    }
  }

  /// Builds a matrix from nested rows; all rows must share one length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& row : rows) {
      if (row.size() != cols) throw Error(ErrorKind::shape, "ragged rows");
      values.insert(values.end(), row.begin(), row.end());
    }
    return Matrix(rows.size(), cols, std::move(values));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

enum class LabelKind { classification, regression };

inline std::string to_string(LabelKind kind) {
  return kind == LabelKind::classification ? "classification" : "regression";
}

/// Paired samples (X_i, Y_i). Validated on construction and immutable after.
class Dataset {
 public:
  Dataset(Matrix features, std::vector<double> labels, LabelKind kind)
      : features_(std::move(features)), labels_(std::move(labels)), kind_(kind) {
    validate();
  }

  std::size_t size() const noexcept { return features_.rows(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  const Matrix& features() const noexcept { return features_; }
  std::span<const double> labels() const noexcept { return labels_; }
  std::span<const double> row(std::size_t i) const noexcept { return features_.row(i); }
  double label(std::size_t i) const noexcept { return labels_[i]; }
  LabelKind kind() const noexcept { return kind_; }

  /// Rows selected by `order`, in that order.
  Dataset select_rows(std::span<const std::size_t> order) const {
    Matrix out(order.size(), dim());
    std::vector<double> labels(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      const auto src = row(order[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
      labels[r] = labels_[order[r]];
    }
    return Dataset(std::move(out), std::move(labels), kind_);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate() const {
    if (features_.rows() == 0 || features_.cols() == 0) {
      throw Error(ErrorKind::shape, "dataset needs n >= 1 and d >= 1");
    }
    if (labels_.size() != features_.rows()) {
      throw Error(ErrorKind::shape, "label count " + std::to_string(labels_.size()) +
                                        " does not match row count " + std::to_string(features_.rows()));
    }
    for (std::size_t i = 0; i < features_.rows(); ++i) {
      for (std::size_t j = 0; j < features_.cols(); ++j) {
        if (!std::isfinite(features_(i, j))) {
          throw Error(ErrorKind::parse, "non-finite feature at row " + std::to_string(i) +
                                            ", column " + std::to_string(j));
        }
      }
      const double y = labels_[i];
      if (!std::isfinite(y)) {
        throw Error(ErrorKind::label, "non-finite label at row " + std::to_string(i));
      }
      if (kind_ == LabelKind::classification && y != 1.0 && y != -1.0) {
        throw Error(ErrorKind::label, "classification label at row " + std::to_string(i) +
                                          " is not -1 or +1");
      }
    }
  }

  Matrix features_;
  std::vector<double> labels_;
  LabelKind kind_;
};

/// Ordered set of 0-based feature indices S.
class FeatureSubset {
 public:
  /// Accepts indices in any order; rejects empty input and duplicates.
  explicit FeatureSubset(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw Error(ErrorKind::invalid_subset, "subset is empty");
    std::sort(indices_.begin(), indices_.end());
    if (auto dup = std::adjacent_find(indices_.begin(), indices_.end()); dup != indices_.end()) {
      throw Error(ErrorKind::invalid_subset, "duplicate index " + std::to_string(*dup));
    }
  }

  static FeatureSubset full(std::size_t d) {
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return FeatureSubset(std::move(all));
  }

  /// All indices in [0, d) except `left_out`.
  static FeatureSubset all_but(std::size_t d, std::size_t left_out) {
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < d; ++j) {
      if (j != left_out) rest.push_back(j);
    }
    return FeatureSubset(std::move(rest));
  }

  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t max_index() const noexcept { return indices_.back(); }
  bool contains(std::size_t j) const noexcept {
    return std::binary_search(indices_.begin(), indices_.end(), j);
  }
  bool is_full(std::size_t d) const noexcept { return indices_.size() == d && max_index() + 1 == d; }

  void check_fits(std::size_t d) const {
    if (max_index() >= d) {
      throw Error(ErrorKind::invalid_subset, "index " + std::to_string(max_index()) +
                                                 " out of range for dimension " + std::to_string(d));
    }
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t j : indices_) {
      if (!out.empty()) out += ',';
      out += std::to_string(j);
    }
    return out;
  }

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;

 private:
  std::vector<std::size_t> indices_;
};

/// Subvector x_S: out[j] = x[S[j]].
inline std::vector<double> project(std::span<const double> x, const FeatureSubset& subset) {
  subset.check_fits(x.size());
  std::vector<double> out;
  out.reserve(subset.size());
  for (std::size_t j : subset.indices()) out.push_back(x[j]);
  return out;
}

inline Matrix project(const Matrix& x, const FeatureSubset& subset) {
  subset.check_fits(x.cols());
  Matrix out(x.rows(), subset.size());
  const auto idx = subset.indices();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = x(i, idx[j]);
  }
  return out;
}

/// sgn with sgn(0) = +1.
constexpr double sgn(double z) noexcept { return z >= 0.0 ? 1.0 : -1.0; }

/// The training half D_n and evaluation half D'_n.
struct SplitPair {
  Dataset train;
  Dataset eval;
  bool dropped_last_row = false;
};

struct SplitOptions {
  bool shuffle = false;
  RngSpec seed{};
};

/// First half -> train, second half -> eval. An odd trailing row is dropped
/// (after the optional shuffle) and reported in the result.
inline SplitPair split(const Dataset& data, const SplitOptions& options = {}) {
  if (data.size() < 4) {
    throw Error(ErrorKind::too_few_samples,
                "split needs at least 4 rows, got " + std::to_string(data.size()));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.shuffle) {
    Rng rng(options.seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
  }
  const std::size_t half = data.size() / 2;
  const std::span<const std::size_t> all(order);
  return SplitPair{data.select_rows(all.subspan(0, half)), data.select_rows(all.subspan(half, half)),
                   data.size() % 2 == 1};
}

}  // namespace losstest
