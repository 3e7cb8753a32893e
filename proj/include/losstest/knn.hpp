#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "losstest/core.hpp"
#include "losstest/kdtree.hpp"
#include "losstest/parallel.hpp"
#include "losstest/rng.hpp"

namespace losstest {

enum class TieMode { index_order, jitter };

/// How equidistant neighbors are ordered.
///
/// index_order: the smaller training index is closer.
/// jitter: every sample gets one extra uniform [0, 1] coordinate, fixed per
/// sample, so exact ties have probability zero. Training rows draw theirs by
/// row index from `jitter_seed`; a query draws its value from a hash of its
/// own coordinates, so the same query always gets the same value.
struct TiePolicy {
  TieMode mode = TieMode::index_order;
  RngSpec jitter_seed{};

  static TiePolicy index_order() { return {}; }
  static TiePolicy jitter(RngSpec seed) { return {TieMode::jitter, seed}; }

  bool uses_jitter() const noexcept { return mode == TieMode::jitter; }
};

inline std::string to_string(TieMode mode) { return mode == TieMode::jitter ? "jitter" : "index"; }

/// The k nearest training rows, nearest first.
struct NeighborList {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
  /// The k-th and (k+1)-th smallest distances are equal, i.e. the tie rule
  /// decided which rows made the list.
  bool boundary_tie = false;
};

/// Auxiliary coordinates for the n training rows.
inline std::vector<double> train_jitter(const TiePolicy& policy, std::size_t n) {
  const RngSpec stream{mix_key(policy.jitter_seed.master_seed, 0x747261696eULL), policy.jitter_seed.stream_id};
  std::vector<double> aux(n);
  for (std::size_t i = 0; i < n; ++i) aux[i] = counter_uniform(stream, i);
  return aux;
}

/// Auxiliary coordinate for a query point, keyed by its coordinates.
inline double query_jitter(const TiePolicy& policy, std::span<const double> query) {
  std::uint64_t h = mix_key(policy.jitter_seed.master_seed, policy.jitter_seed.stream_id, 0x7175657279ULL);
  for (double v : query) h = mix_key(h, std::bit_cast<std::uint64_t>(v));
  return bits_to_unit(h);
}

/// Appends `aux` as a trailing column.
inline Matrix with_aux(const Matrix& x, std::span<const double> aux) {
  Matrix out(x.rows(), x.cols() + 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto src = x.row(i);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[x.cols()] = aux[i];
  }
  return out;
}

inline std::vector<double> with_aux(std::span<const double> q, double aux) {
  std::vector<double> out(q.begin(), q.end());
  out.push_back(aux);
  return out;
}

enum class SearchBackend { brute_force, kd_tree, automatic };

/// Point set prepared for repeated exact k-NN queries. Coordinates are used
/// as given (callers append jitter columns themselves).
class NeighborIndex {
 public:
  explicit NeighborIndex(Matrix points, SearchBackend backend = SearchBackend::automatic)
      : points_(std::make_unique<Matrix>(std::move(points))) {
    const bool tree = backend == SearchBackend::kd_tree ||
                      (backend == SearchBackend::automatic && points_->rows() >= kTreeThreshold);
    if (tree) tree_.emplace(*points_);
  }

  std::size_t size() const noexcept { return points_->rows(); }
  std::size_t dim() const noexcept { return points_->cols(); }
  bool accelerated() const noexcept { return tree_.has_value(); }

  NeighborList nearest(std::span<const double> query, std::size_t k) const {
    if (query.size() != dim()) {
      throw Error(ErrorKind::shape, "query has " + std::to_string(query.size()) + " coordinates, expected " +
                                        std::to_string(dim()));
    }
    if (k == 0 || k > size()) {
      throw Error(ErrorKind::insufficient_neighbors,
                  "k = " + std::to_string(k) + " with " + std::to_string(size()) + " training rows");
    }
    const std::size_t m = std::min(k + 1, size());
    const auto cands = tree_ ? tree_->candidates(query, m) : brute_force_candidates(*points_, query, m);
    NeighborList out;
    out.indices.reserve(k);
    out.distances.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      out.indices.push_back(cands[j].second);
      out.distances.push_back(std::sqrt(cands[j].first));
    }
    out.boundary_tie = m > k && cands[k].first == cands[k - 1].first;
    return out;
  }

 private:
  static constexpr std::size_t kTreeThreshold = 32;

  std::unique_ptr<Matrix> points_;
  std::optional<KdTree> tree_;
};

/// The k training rows nearest to `query`, by exhaustive scan.
inline NeighborList knn_order(const Matrix& train_features, std::span<const double> query, std::size_t k,
                              const TiePolicy& policy = {}) {
  if (query.size() != train_features.cols()) {
    throw Error(ErrorKind::shape, "query dimension does not match training features");
  }
  if (!policy.uses_jitter()) {
    return NeighborIndex(train_features, SearchBackend::brute_force).nearest(query, k);
  }
  const NeighborIndex index(with_aux(train_features, train_jitter(policy, train_features.rows())),
                            SearchBackend::brute_force);
  return index.nearest(with_aux(query, query_jitter(policy, query)), k);
}

/// Mean label of the neighbors, summed nearest first.
inline double mean_label(const Dataset& train, const NeighborList& neighbors) {
  double sum = 0.0;
  for (std::size_t idx : neighbors.indices) sum += train.label(idx);
  return sum / static_cast<double>(neighbors.indices.size());
}

/// k-NN regression estimate (1/k) sum_j Y_(j)(query).
inline double knn_estimate(const Dataset& train, std::span<const double> query, std::size_t k,
                           const TiePolicy& policy = {}) {
  return mean_label(train, knn_order(train.features(), query, k, policy));
}

/// knn_estimate for every row of `queries`; one shared index, parallel over
/// queries, identical to the per-query loop.
inline std::vector<double> knn_estimate_batch(const Dataset& train, const Matrix& queries, std::size_t k,
                                              const TiePolicy& policy = {},
                                              SearchBackend backend = SearchBackend::automatic) {
  if (queries.cols() != train.dim()) {
    throw Error(ErrorKind::shape, "query dimension does not match training features");
  }
  const NeighborIndex index(policy.uses_jitter() ? with_aux(train.features(), train_jitter(policy, train.size()))
                                                 : train.features(),
                            backend);
  std::vector<double> out(queries.rows());
  parallel_for(queries.rows(), [&](std::size_t i) {
    const auto q = queries.row(i);
    const auto neighbors = policy.uses_jitter() ? index.nearest(with_aux(q, query_jitter(policy, q)), k)
                                                : index.nearest(q, k);
    out[i] = mean_label(train, neighbors);
  });
  return out;
}

}  // namespace losstest
