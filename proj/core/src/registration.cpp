#include "tunnelfuse/registration.hpp"

#include "tunnelfuse/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tunnelfuse {

namespace {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

struct TermWeights {
  double planar = 0.0;
  double point = 0.0;
};

TermWeights weights_for(std::size_t n, double alpha) {
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  return {alpha * inv_n, (1.0 - alpha) * inv_n};
}

enum class TermKind { kPlanar, kLinear, kScattered };

TermKind classify(const NormalEstimate& n, double planarity_threshold) {
  if (n.planarity >= planarity_threshold) return TermKind::kPlanar;
  const double scattering = 1.0 - n.planarity - n.linearity;
  return n.linearity >= scattering ? TermKind::kLinear : TermKind::kScattered;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1]");
  }
}

}  // namespace

double hybrid_cost(std::span<const Correspondence> correspondences,
                   std::span<const Eigen::Vector3d> source,
                   std::span<const Eigen::Vector3d> target,
                   std::span<const NormalEstimate> target_normals, double alpha,
                   double planarity_threshold, bool linear_point_terms) {
  const TermWeights w = weights_for(correspondences.size(), alpha);
  double cost = 0.0;
  for (const auto& c : correspondences) {
    const Eigen::Vector3d d = source[c.source_index] - target[c.target_index];
    const NormalEstimate& n = target_normals[c.target_index];
    const TermKind kind = classify(n, planarity_threshold);
    if (kind == TermKind::kPlanar) {
      const double r = n.normal.dot(d);
      cost += w.planar * r * r;
    } else if (kind == TermKind::kScattered || linear_point_terms) {
      cost += w.point * d.squaredNorm();
    }
  }
  return cost;
}

StepResult solve_step(std::span<const Correspondence> correspondences,
                      std::span<const Eigen::Vector3d> source,
                      std::span<const Eigen::Vector3d> target,
                      std::span<const NormalEstimate> target_normals, double alpha,
                      double planarity_threshold, bool linear_point_terms) {
  check_alpha(alpha);
  if (correspondences.size() < 6) {
    throw RegistrationFailed("solve_step: need at least 6 correspondences, got " +
                             std::to_string(correspondences.size()));
  }
  const TermWeights w = weights_for(correspondences.size(), alpha);

  Matrix6d h = Matrix6d::Zero();
  Vector6d g = Vector6d::Zero();
  double cost = 0.0;
  // Increment is [omega, tau] applied on the left: p -> R(omega) p + tau.
  for (const auto& c : correspondences) {
    const Eigen::Vector3d& p = source[c.source_index];
    const Eigen::Vector3d d = p - target[c.target_index];
    const NormalEstimate& n = target_normals[c.target_index];
    const TermKind kind = classify(n, planarity_threshold);
    if (kind == TermKind::kPlanar) {
      if (w.planar == 0.0) continue;
      Vector6d j;
      j.head<3>() = p.cross(n.normal);
      j.tail<3>() = n.normal;
      const double r = n.normal.dot(d);
      h.noalias() += w.planar * j * j.transpose();
      g.noalias() += w.planar * r * j;
      cost += w.planar * r * r;
    } else {
      if (w.point == 0.0 || (kind == TermKind::kLinear && !linear_point_terms)) continue;
      Eigen::Matrix<double, 3, 6> j;
      j.leftCols<3>() << 0.0, p.z(), -p.y(), -p.z(), 0.0, p.x(), p.y(), -p.x(), 0.0;
      j.rightCols<3>().setIdentity();
      h.noalias() += w.point * j.transpose() * j;
      g.noalias() += w.point * j.transpose() * d;
      cost += w.point * d.squaredNorm();
    }
  }

  StepResult out;
  out.cost = cost;
  Eigen::SelfAdjointEigenSolver<Matrix6d> es(h, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(5);
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(hi > 0.0) || !(out.condition <= kMaxNormalEquationCondition)) {
    out.degenerate = true;
    return out;
  }
  const Vector6d delta = -h.ldlt().solve(g);
  out.increment.rotation = rotation_from_vector(delta.head<3>());
  out.increment.translation = delta.tail<3>();
  return out;
}

Eigen::Vector3d translational_constraint(std::span<const Correspondence> correspondences,
                                         std::span<const NormalEstimate> target_normals,
                                         double alpha, double planarity_threshold,
                                         bool linear_point_terms) {
  check_alpha(alpha);
  const TermWeights w = weights_for(correspondences.size(), alpha);
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (const auto& c : correspondences) {
    const NormalEstimate& n = target_normals[c.target_index];
    switch (classify(n, planarity_threshold)) {
      case TermKind::kPlanar:
        info.noalias() += w.planar * n.normal * n.normal.transpose();
        break;
      case TermKind::kLinear:
        if (linear_point_terms) {
          info.noalias() += w.point * (Eigen::Matrix3d::Identity() -
                                       n.direction * n.direction.transpose());
        }
        break;
      case TermKind::kScattered:
        info += w.point * Eigen::Matrix3d::Identity();
        break;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(info, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

PreparedCloud prepare_cloud(const PointCloud& cloud, const RegistrationParams& params) {
  PreparedCloud out;
  out.cloud = voxel_downsample(cloud, params.voxel_size);
  if (out.cloud.size() < params.normal_neighbors + 1) {
    throw RegistrationFailed("register: too few points after downsampling (" +
                             std::to_string(out.cloud.size()) + ")");
  }
  out.tree = KdTree(out.cloud.points);
  out.normals = estimate_normals(out.cloud, out.tree, params.normal_neighbors);
  return out;
}

RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const Transform3& initial_guess,
                                   const RegistrationParams& params) {
  PreparedCloud src;
  src.cloud = voxel_downsample(source, params.voxel_size);
  if (src.cloud.size() < 6) {
    throw RegistrationFailed("register: too few source points after downsampling (" +
                             std::to_string(src.cloud.size()) + ")");
  }
  return register_clouds(src, prepare_cloud(target, params), initial_guess, params);
}

RegistrationResult register_clouds(const PreparedCloud& source, const PreparedCloud& target,
                                   const Transform3& initial_guess,
                                   const RegistrationParams& params) {
  const PointCloud& src = source.cloud;
  const PointCloud& tgt = target.cloud;
  if (src.size() < 6 || tgt.size() < 6) {
    std::ostringstream msg;
    msg << "register: too few points (source " << src.size() << ", target " << tgt.size()
        << ")";
    throw RegistrationFailed(msg.str());
  }
  const KdTree& tree = target.tree;
  const std::vector<NormalEstimate>& normals = target.normals;

  RegistrationResult result;
  result.transform = initial_guess;
  double gate = params.max_correspondence_distance;
  std::vector<Eigen::Vector3d> moved(src.size());
  std::vector<NormalEstimate> matched;

  const auto move_source = [&] {
    for (std::size_t i = 0; i < src.size(); ++i) moved[i] = result.transform.apply(src.points[i]);
  };
  const auto associate_checked = [&](int iteration) {
    const auto corr = associate(moved, tree, gate);
    if (corr.size() < 6) {
      std::ostringstream msg;
      msg << "register: only " << corr.size() << " correspondences within " << gate
          << " m at iteration " << iteration << " (source " << src.size() << ", target "
          << tgt.size() << ")";
      throw RegistrationFailed(msg.str());
    }
    return corr;
  };
  const auto alpha_of = [&](const std::vector<Correspondence>& corr) {
    matched.clear();
    for (const auto& c : corr) matched.push_back(normals[c.target_index]);
    return compute_alpha(matched, params.planarity_threshold);
  };

  bool singular = false;
  for (int it = 0; it < params.max_iterations; ++it) {
    move_source();
    const auto corr = associate_checked(it);
    const double alpha = alpha_of(corr);
    const StepResult step =
        solve_step(corr, moved, tgt.points, normals, alpha, params.planarity_threshold,
                   params.linear_point_terms);
    result.cost_history.push_back(step.cost);
    result.iterations = it + 1;
    if (step.degenerate) {
      singular = true;
      break;
    }
    result.transform = step.increment * result.transform;
    result.transform.rotation = orthonormalize(result.transform.rotation);
    gate = std::max(params.min_correspondence_distance, gate * params.correspondence_shrink);
    if (step.increment.translation.norm() < params.translation_tolerance &&
        step.increment.rotation_angle() < params.rotation_tolerance) {
      break;
    }
  }

  move_source();
  const auto corr = associate_checked(result.iterations);
  result.alpha = alpha_of(corr);
  result.correspondence_count = corr.size();
  result.final_cost =
      hybrid_cost(corr, moved, tgt.points, normals, result.alpha, params.planarity_threshold,
                  params.linear_point_terms);
  result.constraint_eigenvalues = translational_constraint(
      corr, normals, result.alpha, params.planarity_threshold, params.linear_point_terms);
  const double top = result.constraint_eigenvalues[2];
  const bool weak = !(top > 0.0) ||
                    result.constraint_eigenvalues[0] / top < params.degeneracy_ratio;
  result.degenerate = singular || weak;
  return result;
}

PseudoMeasurement odometry_to_pseudo(const RegistrationResult& result, double dt,
                                     const Eigen::Matrix2d& base_noise, double cost_scale,
                                     Timestamp stamp) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("odometry_to_pseudo: dt must be positive");
  }
  if (!(cost_scale > 0.0)) {
    throw InvalidArgument("odometry_to_pseudo: cost_scale must be positive");
  }
  const PlanarProjection planar = transform_to_planar(result.transform);
  const double dist = std::hypot(planar.pose.x, planar.pose.y);
  PseudoMeasurement m;
  m.source = Sensor::kLidar;
  m.stamp = stamp;
  m.v_meas = (planar.pose.x < 0.0 ? -dist : dist) / dt;
  m.psi_dot_meas = planar.pose.psi / dt;
  m.noise = base_noise * (1.0 + result.final_cost / cost_scale);
  if (result.degenerate) m.noise(0, 0) *= 100.0;
  return m;
}

}  // namespace tunnelfuse
