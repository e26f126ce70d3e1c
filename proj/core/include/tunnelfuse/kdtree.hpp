#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace tunnelfuse {

struct Neighbor {
  std::size_t index = 0;
  double dist2 = 0.0;
};

/// Static 3-D kd-tree with exact nearest / k-nearest queries. Equidistant
/// candidates resolve to the lowest point index, so results are identical to a
/// brute-force scan.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Eigen::Vector3d> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Eigen::Vector3d& point(std::size_t i) const { return points_[i]; }

  /// Nearest point with squared distance <= max_dist2, if any.
  std::optional<Neighbor> nearest(const Eigen::Vector3d& q,
                                  double max_dist2 = std::numeric_limits<double>::infinity()) const;

  /// The k nearest points ordered by (distance, index).
  std::vector<Neighbor> knn(const Eigen::Vector3d& q, std::size_t k) const;

 private:
  struct Node {
    // Leaf when `split_dim` < 0; then [begin, end) indexes `order_`.
    int split_dim = -1;
    double split_value = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::uint32_t node, const Eigen::Vector3d& q, Neighbor& best,
                      bool& found) const;
  void search_knn(std::uint32_t node, const Eigen::Vector3d& q, std::size_t k,
                  std::vector<Neighbor>& best) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<std::uint32_t> order_;
  // points_ permuted into order_, so leaves scan contiguous memory.
  std::vector<Eigen::Vector3d> ordered_;
  std::vector<Node> nodes_;
};

}  // namespace tunnelfuse
