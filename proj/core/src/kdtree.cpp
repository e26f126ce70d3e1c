#include "tunnelfuse/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace tunnelfuse {

namespace {

constexpr std::uint32_t kLeafSize = 16;

inline bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Eigen::Vector3d> points)
    : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
  ordered_.reserve(points_.size());
  for (std::uint32_t i : order_) ordered_.push_back(points_[i]);
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  if (hi[dim] - lo[dim] <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][dim];
                     const double pb = points_[b][dim];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][dim];

  nodes_[id].split_dim = dim;
  nodes_[id].split_value = split;
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<Neighbor> KdTree::nearest(const Eigen::Vector3d& q, double max_dist2) const {
  if (points_.empty()) return std::nullopt;
  Neighbor best{std::numeric_limits<std::size_t>::max(), max_dist2};
  bool found = false;
  search_nearest(0, q, best, found);
  if (!found) return std::nullopt;
  return best;
}

void KdTree::search_nearest(std::uint32_t id, const Eigen::Vector3d& q, Neighbor& best,
                            bool& found) const {
  const Node& node = nodes_[id];
  if (node.split_dim < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], (ordered_[i] - q).squaredNorm()};
      if (cand.dist2 <= best.dist2 && (!found || closer(cand, best))) {
        best = cand;
        found = true;
      }
    }
    return;
  }
  const double diff = q[node.split_dim] - node.split_value;
  const std::uint32_t first = diff < 0.0 ? node.left : node.right;
  const std::uint32_t second = diff < 0.0 ? node.right : node.left;
  search_nearest(first, q, best, found);
  // Points equal to the split value may sit on either side, so only prune
  // strictly farther half-spaces.
  if (diff * diff <= best.dist2) search_nearest(second, q, best, found);
}

std::vector<Neighbor> KdTree::knn(const Eigen::Vector3d& q, std::size_t k) const {
  std::vector<Neighbor> best;
  if (points_.empty() || k == 0) return best;
  best.reserve(k + 1);
  search_knn(0, q, k, best);
  return best;
}

// `best` stays sorted by (distance, index); k is small, so insertion beats a heap.
void KdTree::search_knn(std::uint32_t id, const Eigen::Vector3d& q, std::size_t k,
                        std::vector<Neighbor>& best) const {
  const Node& node = nodes_[id];
  if (node.split_dim < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d2 = (ordered_[i] - q).squaredNorm();
      if (best.size() == k && d2 > best.back().dist2) continue;
      const Neighbor cand{order_[i], d2};
      if (best.size() == k && !closer(cand, best.back())) continue;
      auto pos = best.end();
      while (pos != best.begin() && closer(cand, *std::prev(pos))) --pos;
      best.insert(pos, cand);
      if (best.size() > k) best.pop_back();
    }
    return;
  }
  const double diff = q[node.split_dim] - node.split_value;
  const std::uint32_t first = diff < 0.0 ? node.left : node.right;
  const std::uint32_t second = diff < 0.0 ? node.right : node.left;
  search_knn(first, q, k, best);
  if (best.size() < k || diff * diff <= best.back().dist2) {
    search_knn(second, q, k, best);
  }
}

}  // namespace tunnelfuse
