#pragma once

#include "tunnelfuse/geometry.hpp"
#include "tunnelfuse/measurement.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <utility>

namespace tunnelfuse {

/// Behavioural model of a monocular keyframe odometry running on thermal
/// frames: translation is only known up to a slowly drifting scale.
struct ThermalOdomParams {
  int keyframe_interval = 5;               // frames
  double scale_bias_walk_sigma = 0.02;     // 1/sqrt(s), log-space
  double v_noise_sigma = 0.15;             // m/s
  double psi_dot_noise_sigma = 0.02;       // rad/s
  double dropout_probability_per_frame = 0.02;
  double frame_rate = 9.0;                 // Hz
  double initial_scale_bias = 1.0;
  /// Covariance attached to emitted measurements (what the filter is told).
  Eigen::Matrix2d measurement_noise = Eigen::Vector2d(0.3 * 0.3, 0.03 * 0.03).asDiagonal();

  void validate() const;
};

struct ThermalOdomState {
  double current_scale_bias = 1.0;
  Pose2 last_keyframe_pose;
  int frames_since_keyframe = 0;
  std::mt19937_64 rng;
  /// Ground-truth pose of the previous frame; empty before the first frame.
  std::optional<Pose2> previous_pose;

  static ThermalOdomState initial(const ThermalOdomParams& params, std::uint64_t seed);
};

/// Advances the simulated thermal front-end by one frame. The very first call
/// only latches the keyframe and never emits.
std::pair<ThermalOdomState, std::optional<PseudoMeasurement>> thermal_step(
    ThermalOdomState state, const Pose2& true_pose, double dt, Timestamp stamp,
    const ThermalOdomParams& params);

/// Degrades nominal parameters for a smoke/darkness level in [0, 1]: dropout
/// probability and v noise scale linearly from 1x to 2x nominal.
ThermalOdomParams thermal_quality(double level, const ThermalOdomParams& nominal);

}  // namespace tunnelfuse
