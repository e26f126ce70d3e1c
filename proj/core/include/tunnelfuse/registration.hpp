#pragma once

#include "tunnelfuse/geometry.hpp"
#include "tunnelfuse/kdtree.hpp"
#include "tunnelfuse/measurement.hpp"
#include "tunnelfuse/point_cloud.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace tunnelfuse {

/// Normal equations whose condition number exceeds this are not solved.
inline constexpr double kMaxNormalEquationCondition = 1e12;

struct RegistrationParams {
  double voxel_size = 0.3;
  std::size_t normal_neighbors = 10;
  double planarity_threshold = 0.5;
  /// Keep point-to-point terms for targets whose neighbourhood is linear.
  /// Sparse scan rings make such neighbourhoods a single ring, and matching
  /// along the ring pins the estimate to the sensor's own sampling pattern,
  /// so they are dropped by default.
  bool linear_point_terms = false;
  double max_correspondence_distance = 1.0;
  double correspondence_shrink = 0.9;
  double min_correspondence_distance = 0.25;
  int max_iterations = 50;
  double translation_tolerance = 1e-5;  // m
  double rotation_tolerance = 1e-6;     // rad
  /// Smallest-to-largest eigenvalue ratio of the translational constraint
  /// information below which the solution is flagged degenerate.
  double degeneracy_ratio = 0.02;
};

struct StepResult {
  Transform3 increment;
  /// Hybrid objective at the linearization point.
  double cost = 0.0;
  double condition = 0.0;
  bool degenerate = false;
};

/// One Gauss-Newton step of the hybrid objective
///   (1 - alpha)/N * sum_nonplanar |p - q|^2 + alpha/N * sum_planar (n . (p - q))^2
/// where a correspondence is planar when its target point's planarity reaches
/// `planarity_threshold`. Non-planar correspondences whose target is linear
/// contribute only when `linear_point_terms` is set. `source` holds the source
/// points already moved by the current estimate. Returns an identity increment
/// with `degenerate` set when the normal equations are numerically singular.
StepResult solve_step(std::span<const Correspondence> correspondences,
                      std::span<const Eigen::Vector3d> source,
                      std::span<const Eigen::Vector3d> target,
                      std::span<const NormalEstimate> target_normals, double alpha,
                      double planarity_threshold = 0.5, bool linear_point_terms = true);

/// Hybrid objective value for a fixed set of correspondences.
double hybrid_cost(std::span<const Correspondence> correspondences,
                   std::span<const Eigen::Vector3d> source,
                   std::span<const Eigen::Vector3d> target,
                   std::span<const NormalEstimate> target_normals, double alpha,
                   double planarity_threshold, bool linear_point_terms = true);

/// Eigenvalues (ascending) of the 3x3 translational information carried by the
/// local geometry of the matched target points: planar points constrain their
/// normal, linear points the plane orthogonal to their direction, scattered
/// points all three axes.
Eigen::Vector3d translational_constraint(std::span<const Correspondence> correspondences,
                                         std::span<const NormalEstimate> target_normals,
                                         double alpha, double planarity_threshold,
                                         bool linear_point_terms = true);

struct RegistrationResult {
  /// Maps source-frame points into the target frame.
  Transform3 transform;
  int iterations = 0;
  double final_cost = 0.0;
  double alpha = 0.0;
  std::size_t correspondence_count = 0;
  bool degenerate = false;
  /// Objective at the start of each iteration.
  std::vector<double> cost_history;
  /// Translational constraint eigenvalues at convergence (ascending).
  Eigen::Vector3d constraint_eigenvalues = Eigen::Vector3d::Zero();
};

/// A downsampled cloud with its search tree and normals, reusable as the
/// target of several registrations.
struct PreparedCloud {
  PointCloud cloud;
  KdTree tree;
  std::vector<NormalEstimate> normals;
};

/// Throws RegistrationFailed when fewer than normal_neighbors + 1 points
/// survive downsampling.
PreparedCloud prepare_cloud(const PointCloud& cloud, const RegistrationParams& params);

/// Scan-to-scan ICP: downsample both clouds, then alternate association,
/// alpha estimation and a hybrid Gauss-Newton step until the increment falls
/// under tolerance. Throws RegistrationFailed when fewer than 6
/// correspondences survive gating.
RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const Transform3& initial_guess,
                                   const RegistrationParams& params = {});

/// As register_clouds with both clouds already prepared.
RegistrationResult register_clouds(const PreparedCloud& source, const PreparedCloud& target,
                                   const Transform3& initial_guess,
                                   const RegistrationParams& params = {});

/// Turns frame-to-frame motion into a (v, psi_dot) pseudo-measurement.
/// `base_noise` is scaled by (1 + final_cost / cost_scale); the v variance is
/// inflated 100x for degenerate registrations.
PseudoMeasurement odometry_to_pseudo(const RegistrationResult& result, double dt,
                                     const Eigen::Matrix2d& base_noise, double cost_scale,
                                     Timestamp stamp);

}  // namespace tunnelfuse
