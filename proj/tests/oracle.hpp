#pragma once

// Test-only reference implementations. Deliberately naive: they share no code
// with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "losstest/core.hpp"

namespace losstest::oracle {

/// Indices of the k nearest rows of `x` (restricted to `cols`) to row `q` of
/// `qx`, ties to the smaller index, by full stable sort.
inline std::vector<std::size_t> nearest(const Matrix& x, const Matrix& qx, std::size_t q,
                                        const std::vector<std::size_t>& cols, std::size_t k) {
  std::vector<std::size_t> order(x.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto dist = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t c : cols) s += (x(i, c) - qx(q, c)) * (x(i, c) - qx(q, c));
    return s;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  order.resize(k);
  return order;
}

enum class Kind { classification, regression, baseline };

inline double statistic(const SplitPair& s, const std::vector<std::size_t>& subset, std::size_t k, Kind kind) {
  std::vector<std::size_t> all(s.train.dim());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  const Matrix& tx = s.train.features();
  const Matrix& ex = s.eval.features();
  auto mean = [&](const std::vector<std::size_t>& idx) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += s.train.label(i);
    return sum / static_cast<double>(idx.size());
  };
  double total = 0.0;
  for (std::size_t i = 0; i < s.eval.size(); ++i) {
    const double y = s.eval.label(i);
    const auto full = nearest(tx, ex, i, all, kind == Kind::baseline ? 1 : k);
    const auto proj = nearest(tx, ex, i, subset, kind == Kind::baseline ? 1 : k);
    switch (kind) {
      case Kind::classification:
        total += y * (mean(full) >= 0 ? 1.0 : -1.0) - std::abs(mean(proj));
        break;
      case Kind::regression:
        total += y * mean(full) - mean(proj) * mean(proj);
        break;
      case Kind::baseline:
        total += y * (s.train.label(full[0]) - s.train.label(proj[0]));
        break;
    }
  }
  return total / static_cast<double>(s.eval.size());
}

}  // namespace losstest::oracle
