#pragma once

#include "tunnelfuse/geometry.hpp"
#include "tunnelfuse/point_cloud.hpp"
#include "tunnelfuse/trajectory.hpp"
#include "tunnelfuse/tunnel_map.hpp"

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace tunnelfuse {

struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // unit length
};

/// Planar rectangle {origin + a u + b v : a in [0, u_len], b in [0, v_len]}
/// with orthonormal u, v.
struct RectPatch {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d v = Eigen::Vector3d::UnitY();
  double u_len = 0.0;
  double v_len = 0.0;
};

/// Vertical cylinder wall. Covers polar angles [theta0, theta0 + span] around
/// `center`; span >= 2 pi means the full circle.
struct CylinderPatch {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  double theta0 = 0.0;
  double span = 2.0 * kPi;
  double z_min = -std::numeric_limits<double>::infinity();
  double z_max = std::numeric_limits<double>::infinity();
};

/// Horizontal annulus sector at height z (floor or ceiling of an arc).
struct AnnulusPatch {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double z = 0.0;
  double r_min = 0.0;
  double r_max = 1.0;
  double theta0 = 0.0;
  double span = 2.0 * kPi;
};

/// Ray parameters of the nearest hit; infinity when there is none. Hits at
/// t <= 1e-9 are ignored.
double intersect(const Ray& ray, const RectPatch& patch);
double intersect(const Ray& ray, const CylinderPatch& patch);
double intersect(const Ray& ray, const AnnulusPatch& patch);
double intersect(const Ray& ray, const FeatureBox& box);

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d max = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Eigen::Vector3d& p);
  /// Euclidean distance from p to the box (0 inside).
  double distance(const Eigen::Vector3d& p) const;
};

/// Collection of analytic surfaces in the world frame.
class Scene {
 public:
  void add(const RectPatch& p);
  void add(const CylinderPatch& p);
  void add(const AnnulusPatch& p);
  void add(const FeatureBox& b);

  /// Nearest hit within (0, max_range], brute force over every surface.
  std::optional<double> cast(const Ray& ray, double max_range) const;

  const std::vector<RectPatch>& rects() const { return rects_; }
  const std::vector<CylinderPatch>& cylinders() const { return cylinders_; }
  const std::vector<AnnulusPatch>& annuli() const { return annuli_; }
  const std::vector<FeatureBox>& boxes() const { return boxes_; }
  const std::vector<Aabb>& rect_bounds() const { return rect_bounds_; }
  const std::vector<Aabb>& cylinder_bounds() const { return cylinder_bounds_; }
  const std::vector<Aabb>& annulus_bounds() const { return annulus_bounds_; }

 private:
  std::vector<RectPatch> rects_;
  std::vector<CylinderPatch> cylinders_;
  std::vector<AnnulusPatch> annuli_;
  std::vector<FeatureBox> boxes_;
  std::vector<Aabb> rect_bounds_;
  std::vector<Aabb> cylinder_bounds_;
  std::vector<Aabb> annulus_bounds_;
};

/// Walls, floor and ceiling of every segment plus the feature boxes.
Scene build_scene(const TunnelMap& map);

struct LidarModel {
  int horizontal_rays = 1024;
  int vertical_rays = 128;
  double vertical_fov = deg_to_rad(45.0);  // rad, symmetric about horizontal
  double max_range = 120.0;                // m
  double mount_height = 1.5;               // m above the floor
  /// Azimuth of column 0. A free-running spinning sensor starts each sweep at
  /// an arbitrary phase.
  double azimuth_offset = 0.0;  // rad

  void validate() const;
};

/// Unit ray directions in the sensor frame (x forward, z up). Ray index is
/// column * vertical_rays + row; column c points at azimuth
/// azimuth_offset + 2 pi c / H, rows
/// span the vertical field of view bottom to top.
std::vector<Eigen::Vector3d> ray_directions(const LidarModel& model);

/// Scan from a sensor at (pose.x, pose.y, mount_height) yawed by pose.psi.
/// Points are returned in the sensor frame in ray-index order, each pushed
/// along its ray by N(0, noise_sigma^2); rays without a hit within max_range
/// are omitted. No footprint check.
PointCloud render_scan(const Scene& scene, const Pose2& pose, const LidarModel& model,
                       double noise_sigma, std::mt19937_64& rng, Timestamp stamp = {});

/// As above for a tunnel. Throws InvalidPose when the sample lies outside the
/// tunnel footprint or the mount height is not below the ceiling.
PointCloud render_scan(const TunnelMap& map, const Scene& scene, const GroundTruthSample& sample,
                       const LidarModel& model, double noise_sigma, std::mt19937_64& rng);
PointCloud render_scan(const TunnelMap& map, const GroundTruthSample& sample,
                       const LidarModel& model, double noise_sigma, std::mt19937_64& rng);

}  // namespace tunnelfuse
