#include "tunnelfuse/point_cloud.hpp"

#include "tunnelfuse/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace tunnelfuse {

PointCloud transform_cloud(const PointCloud& cloud, const Transform3& t) {
  PointCloud out;
  out.stamp = cloud.stamp;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw InvalidArgument("voxel_downsample: voxel_size must be positive");
  }
  PointCloud out;
  out.stamp = cloud.stamp;
  if (cloud.empty()) return out;

  using Key = std::array<std::int64_t, 3>;
  std::vector<std::pair<Key, std::uint32_t>> keyed;
  keyed.reserve(cloud.size());
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    keyed.push_back({{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                      static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                      static_cast<std::int64_t>(std::floor(p.z() / voxel_size))},
                     i});
  }
  std::sort(keyed.begin(), keyed.end());

  for (std::size_t i = 0; i < keyed.size();) {
    std::size_t j = i;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    while (j < keyed.size() && keyed[j].first == keyed[i].first) {
      sum += cloud.points[keyed[j].second];
      ++j;
    }
    out.points.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

std::vector<NormalEstimate> estimate_normals(const PointCloud& cloud, std::size_t k) {
  if (k < 4 || cloud.size() < k + 1) {
    throw InsufficientPoints("estimate_normals: need k >= 4 and at least k+1 points (k=" +
                             std::to_string(k) + ", n=" + std::to_string(cloud.size()) + ")");
  }
  const KdTree tree(cloud.points);
  return estimate_normals(cloud, tree, k);
}

std::vector<NormalEstimate> estimate_normals(const PointCloud& cloud, const KdTree& tree,
                                             std::size_t k) {
  if (k < 4 || cloud.size() < k + 1) {
    throw InsufficientPoints("estimate_normals: need k >= 4 and at least k+1 points (k=" +
                             std::to_string(k) + ", n=" + std::to_string(cloud.size()) + ")");
  }
  std::vector<NormalEstimate> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    // The query point is its own nearest neighbour, so k+1 covers it plus k others.
    const auto nbrs = tree.knn(p, k + 1);

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& n : nbrs) mean += tree.point(n.index);
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& n : nbrs) {
      const Eigen::Vector3d d = tree.point(n.index) - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(cov);
    // Ascending: l3 <= l2 <= l1.
    const Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0);
    NormalEstimate& est = out[i];
    const double l1 = ev[2];
    if (l1 > 0.0) {
      est.planarity = std::clamp((ev[1] - ev[0]) / l1, 0.0, 1.0);
      est.linearity = std::clamp((l1 - ev[1]) / l1, 0.0, 1.0);
    }
    est.normal = es.eigenvectors().col(0).normalized();
    est.direction = es.eigenvectors().col(2).normalized();
    if (est.normal.dot(-p) < 0.0) est.normal = -est.normal;
  }
  return out;
}

std::vector<Correspondence> associate(const PointCloud& source, const PointCloud& target,
                                      double max_dist) {
  const KdTree tree(target.points);
  return associate(source.points, tree, max_dist);
}

std::vector<Correspondence> associate(std::span<const Eigen::Vector3d> source,
                                      const KdTree& target, double max_dist) {
  if (!(max_dist > 0.0)) throw InvalidArgument("associate: max_dist must be positive");
  std::vector<Correspondence> out;
  out.reserve(source.size());
  const double max_dist2 = max_dist * max_dist;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (const auto nn = target.nearest(source[i], max_dist2)) {
      out.push_back({i, nn->index, std::sqrt(nn->dist2)});
    }
  }
  return out;
}

double compute_alpha(std::span<const NormalEstimate> normals, double planarity_threshold) {
  if (normals.empty()) throw InvalidArgument("compute_alpha: no normals");
  std::size_t planar = 0;
  for (const auto& n : normals) planar += n.planarity >= planarity_threshold ? 1 : 0;
  return static_cast<double>(planar) / static_cast<double>(normals.size());
}

}  // namespace tunnelfuse
