#pragma once

#include "tunnelfuse/geometry.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>

namespace tunnelfuse {

enum class Sensor { kLidar = 0, kThermal = 1 };

std::string_view to_string(Sensor s);
/// Accepts "lidar"/"LiDAR" and "thermal"/"Thermal".
std::optional<Sensor> sensor_from_string(std::string_view s);

/// (v, psi_dot) observation produced by an odometry front-end.
struct PseudoMeasurement {
  double v_meas = 0.0;
  double psi_dot_meas = 0.0;
  Eigen::Matrix2d noise = Eigen::Matrix2d::Identity();
  Sensor source = Sensor::kLidar;
  Timestamp stamp;

  Eigen::Vector2d value() const { return {v_meas, psi_dot_meas}; }
};

/// Event ordering used everywhere: by time, LiDAR before thermal on ties.
inline bool event_before(const PseudoMeasurement& a, const PseudoMeasurement& b) {
  if (a.stamp.seconds != b.stamp.seconds) return a.stamp.seconds < b.stamp.seconds;
  return static_cast<int>(a.source) < static_cast<int>(b.source);
}

}  // namespace tunnelfuse
