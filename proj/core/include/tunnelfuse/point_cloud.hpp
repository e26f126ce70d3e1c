#pragma once

#include "tunnelfuse/geometry.hpp"
#include "tunnelfuse/kdtree.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace tunnelfuse {

/// 3-D scan in the sensor frame.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  Timestamp stamp;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointCloud transform_cloud(const PointCloud& cloud, const Transform3& t);

/// Local shape of a point neighbourhood from the eigenvalues l1 >= l2 >= l3 of
/// its covariance.
struct NormalEstimate {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // eigenvector of l3
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // eigenvector of l1
  double planarity = 0.0;   // (l2 - l3) / l1
  double linearity = 0.0;   // (l1 - l2) / l1
};

/// One centroid per occupied voxel, emitted in sorted cell-index order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

/// Normals from the point plus its k nearest neighbours, flipped toward the
/// sensor origin. Throws InsufficientPoints if the cloud has fewer than k+1
/// points or k < 4.
std::vector<NormalEstimate> estimate_normals(const PointCloud& cloud, std::size_t k);
std::vector<NormalEstimate> estimate_normals(const PointCloud& cloud, const KdTree& tree,
                                             std::size_t k);

struct Correspondence {
  std::size_t source_index = 0;
  std::size_t target_index = 0;
  double distance = 0.0;
};

/// Nearest target neighbour of every source point within max_dist.
std::vector<Correspondence> associate(const PointCloud& source, const PointCloud& target,
                                      double max_dist);
std::vector<Correspondence> associate(std::span<const Eigen::Vector3d> source,
                                      const KdTree& target, double max_dist);

/// Fraction of estimates whose planarity reaches the threshold.
double compute_alpha(std::span<const NormalEstimate> normals, double planarity_threshold);

}  // namespace tunnelfuse
