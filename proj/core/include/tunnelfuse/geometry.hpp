#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <compare>
#include <utility>

namespace tunnelfuse {

inline constexpr double kPi = 3.14159265358979323846;

/// Seconds since scenario start.
struct Timestamp {
  double seconds = 0.0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(double s) : seconds(s) {}
  constexpr auto operator<=>(const Timestamp&) const = default;
};

/// Maps any finite angle to (-pi, pi]. Throws InvalidArgument on NaN/Inf.
double wrap_angle(double psi);

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Filter state

inline constexpr int kStateDim = 7;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Index of each channel inside StateVec / StateMat.
enum StateIndex : int {
  kX = 0,
  kY = 1,
  kV = 2,
  kVDot = 3,
  kPsi = 4,
  kPsiDot = 5,
  kPsiDDot = 6,
};

/// Planar vehicle state: position, forward speed and acceleration, yaw and
/// its first two derivatives. Yaw is kept wrapped to (-pi, pi].
class StateVector {
 public:
  StateVector() : values_(StateVec::Zero()) {}
  explicit StateVector(const StateVec& values);
  StateVector(double x, double y, double v, double v_dot, double psi,
              double psi_dot, double psi_ddot);

  double x() const { return values_[kX]; }
  double y() const { return values_[kY]; }
  double v() const { return values_[kV]; }
  double v_dot() const { return values_[kVDot]; }
  double psi() const { return values_[kPsi]; }
  double psi_dot() const { return values_[kPsiDot]; }
  double psi_ddot() const { return values_[kPsiDDot]; }

  const StateVec& vector() const { return values_; }
  double operator[](int i) const { return values_[i]; }

  bool all_finite() const { return values_.allFinite(); }

 private:
  StateVec values_;
};

/// 7x7 state covariance. Construction symmetrizes the input as (P + P^T)/2.
class CovarianceMatrix {
 public:
  CovarianceMatrix() : values_(StateMat::Identity()) {}
  explicit CovarianceMatrix(const StateMat& values);

  static CovarianceMatrix from_diagonal(const StateVec& diagonal);

  const StateMat& matrix() const { return values_; }
  double operator()(int r, int c) const { return values_(r, c); }
  StateVec diagonal() const { return values_.diagonal(); }

  double min_eigenvalue() const;
  bool is_positive_definite() const { return min_eigenvalue() > 0.0; }
  /// Trace of the (x, y) block.
  double position_trace() const { return values_(kX, kX) + values_(kY, kY); }

 private:
  StateMat values_;
};

// ---------------------------------------------------------------------------
// Rigid-body poses

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  static Pose2 identity() { return {}; }
  Pose2 inverse() const;
};

/// a (+) b: b expressed in a's frame, composed into a's parent frame.
Pose2 pose_compose(const Pose2& a, const Pose2& b);

struct Transform3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Transform3 identity() { return {}; }
  static Transform3 from_yaw(double yaw, const Eigen::Vector3d& t);
  /// Lifts a planar pose into 3D (z = 0, roll = pitch = 0).
  static Transform3 embed(const Pose2& p);

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  Transform3 inverse() const;
  Transform3 operator*(const Transform3& rhs) const;

  /// R^T R = I and det(R) = 1, both to `tol`.
  bool is_valid(double tol = 1e-9) const;
  double rotation_angle() const;
};

struct PlanarProjection {
  Pose2 pose;
  /// |t_z| + |roll| + |pitch| discarded by the projection.
  double residual = 0.0;
};

/// Drops the out-of-plane part of a transform using ZYX Euler angles. Throws
/// DegenerateOrientation when pitch is within 1e-6 of +-pi/2.
PlanarProjection transform_to_planar(const Transform3& t);

/// Rotation about `axis_angle` (direction = axis, norm = angle).
Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& axis_angle);

/// Nearest rotation matrix (SVD projection).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

}  // namespace tunnelfuse
