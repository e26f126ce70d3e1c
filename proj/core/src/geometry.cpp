#include "tunnelfuse/geometry.hpp"

#include "tunnelfuse/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace tunnelfuse {

double wrap_angle(double psi) {
  if (!std::isfinite(psi)) {
    throw InvalidArgument("wrap_angle: non-finite angle");
  }
  double r = std::remainder(psi, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

StateVector::StateVector(const StateVec& values) : values_(values) {
  if (std::isfinite(values_[kPsi])) values_[kPsi] = wrap_angle(values_[kPsi]);
}

StateVector::StateVector(double x, double y, double v, double v_dot,
                         double psi, double psi_dot, double psi_ddot) {
  values_ << x, y, v, v_dot, psi, psi_dot, psi_ddot;
  if (std::isfinite(psi)) values_[kPsi] = wrap_angle(psi);
}

CovarianceMatrix::CovarianceMatrix(const StateMat& values)
    : values_(0.5 * (values + values.transpose())) {}

CovarianceMatrix CovarianceMatrix::from_diagonal(const StateVec& diagonal) {
  return CovarianceMatrix(StateMat(diagonal.asDiagonal()));
}

double CovarianceMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<StateMat> es(values_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Pose2 Pose2::inverse() const {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {-(c * x + s * y), s * x - c * y, wrap_angle(-psi)};
}

Pose2 pose_compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.psi);
  const double s = std::sin(a.psi);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
          wrap_angle(a.psi + b.psi)};
}

Transform3 Transform3::from_yaw(double yaw, const Eigen::Vector3d& t) {
  Transform3 out;
  out.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  out.translation = t;
  return out;
}

Transform3 Transform3::embed(const Pose2& p) {
  return from_yaw(p.psi, Eigen::Vector3d(p.x, p.y, 0.0));
}

Transform3 Transform3::inverse() const {
  Transform3 out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Transform3 Transform3::operator*(const Transform3& rhs) const {
  Transform3 out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

bool Transform3::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

double Transform3::rotation_angle() const {
  const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

PlanarProjection transform_to_planar(const Transform3& t) {
  const Eigen::Matrix3d& r = t.rotation;
  // R = Rz(yaw) * Ry(pitch) * Rx(roll)
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sp);
  if (std::abs(std::abs(pitch) - kPi / 2.0) <= 1e-6) {
    throw DegenerateOrientation("transform_to_planar: pitch at +-pi/2");
  }
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  PlanarProjection out;
  out.pose = {t.translation.x(), t.translation.y(), wrap_angle(yaw)};
  out.residual =
      std::abs(t.translation.z()) + std::abs(roll) + std::abs(pitch);
  return out;
}

Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-300) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

}  // namespace tunnelfuse
