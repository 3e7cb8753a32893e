#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "losstest/core.hpp"

namespace losstest {

/// Squared Euclidean distance, accumulated left to right. Every search path
/// uses this one function so that results compare bit for bit.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

/// (squared distance, training index); lexicographic order is the tie rule.
using Candidate = std::pair<double, std::size_t>;

/// Exhaustive scan: the m smallest candidates in ascending order.
inline std::vector<Candidate> brute_force_candidates(const Matrix& points, std::span<const double> query,
                                                     std::size_t m) {
  std::vector<Candidate> all(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) all[i] = {squared_distance(points.row(i), query), i};
  m = std::min(m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end());
  all.resize(m);
  return all;
}

/// Static kd-tree returning exactly the same candidates as the exhaustive scan,
/// including the smaller-index-wins rule on equal distances.
class KdTree {
 public:
  explicit KdTree(const Matrix& points, std::size_t leaf_size = 8)
      : points_(&points), leaf_size_(std::max<std::size_t>(1, leaf_size)), order_(points.rows()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!order_.empty()) build(0, order_.size());
  }

  std::size_t size() const noexcept { return order_.size(); }

  std::vector<Candidate> candidates(std::span<const double> query, std::size_t m) const {
    m = std::min(m, order_.size());
    std::vector<Candidate> heap;
    heap.reserve(m + 1);
    if (m > 0) search(0, query, m, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t dim = 0;
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    bool leaf = true;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    const Matrix& pts = *points_;
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t j = 0; j < pts.cols(); ++j) {
      double lo = pts(order_[begin], j);
      double hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        lo = std::min(lo, pts(order_[i], j));
        hi = std::max(hi, pts(order_[i], j));
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = j;
      }
    }
    // All points coincide: splitting cannot separate them.
    if (best_spread <= 0.0) return id;

    const std::size_t mid = begin + (end - begin) / 2;
    const auto first = order_.begin();
    std::nth_element(first + static_cast<std::ptrdiff_t>(begin), first + static_cast<std::ptrdiff_t>(mid),
                     first + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                       return pts(a, best_dim) < pts(b, best_dim);
                     });
    const double split = pts(order_[mid], best_dim);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    Node& node = nodes_[id];
    node.dim = best_dim;
    node.split = split;
    node.left = static_cast<std::uint32_t>(left);
    node.right = static_cast<std::uint32_t>(right);
    node.leaf = false;
    return id;
  }

  // Left subtree coordinates are <= split, right subtree coordinates >= split,
  // so (query - split)^2 never exceeds the rounded distance to any point on
  // the far side. Equality still descends: a tied point may have a smaller
  // index.
  void search(std::size_t id, std::span<const double> query, std::size_t m, std::vector<Candidate>& heap) const {
    const Node& node = nodes_[id];
    if (node.leaf) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const Candidate cand{squared_distance(points_->row(idx), query), idx};
        if (heap.size() < m) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double diff = query[node.dim] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, query, m, heap);
    if (heap.size() < m || diff * diff <= heap.front().first) search(far, query, m, heap);
  }

  const Matrix* points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace losstest
