#include "tunnelfuse/thermal_odometry.hpp"

#include "tunnelfuse/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tunnelfuse {

namespace {

Pose2 scaled(const Pose2& p, double s) { return {s * p.x, s * p.y, p.psi}; }

}  // namespace

void ThermalOdomParams::validate() const {
  if (keyframe_interval < 1) throw InvalidArgument("thermal: keyframe_interval must be >= 1");
  if (!(scale_bias_walk_sigma >= 0.0) || !(v_noise_sigma >= 0.0) ||
      !(psi_dot_noise_sigma >= 0.0)) {
    throw InvalidArgument("thermal: noise sigmas must be non-negative");
  }
  if (!(dropout_probability_per_frame >= 0.0 && dropout_probability_per_frame <= 1.0)) {
    throw InvalidArgument("thermal: dropout probability must lie in [0, 1]");
  }
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw InvalidArgument("thermal: frame_rate must be positive");
  }
  if (!(initial_scale_bias > 0.0)) {
    throw InvalidArgument("thermal: initial_scale_bias must be positive");
  }
}

ThermalOdomState ThermalOdomState::initial(const ThermalOdomParams& params, std::uint64_t seed) {
  params.validate();
  ThermalOdomState s;
  s.current_scale_bias = params.initial_scale_bias;
  s.rng.seed(seed);
  return s;
}

std::pair<ThermalOdomState, std::optional<PseudoMeasurement>> thermal_step(
    ThermalOdomState state, const Pose2& true_pose, double dt, Timestamp stamp,
    const ThermalOdomParams& params) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("thermal_step: dt must be positive");

  if (!state.previous_pose) {
    state.last_keyframe_pose = true_pose;
    state.previous_pose = true_pose;
    state.frames_since_keyframe = 0;
    return {std::move(state), std::nullopt};
  }

  // Draw every variate each frame so the stream does not depend on which
  // parameters happen to be zero.
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double walk = unit(state.rng);
  const double v_noise = unit(state.rng);
  const double psi_noise = unit(state.rng);
  const double drop = uniform(state.rng);

  state.current_scale_bias *= std::exp(params.scale_bias_walk_sigma * std::sqrt(dt) * walk);
  const double bias = state.current_scale_bias;

  // Keyframe-relative motion with the translation scaled by the bias; the
  // frame-to-frame difference of the two is what the front-end reports.
  const Pose2 kf_inv = state.last_keyframe_pose.inverse();
  const Pose2 rel_prev = scaled(pose_compose(kf_inv, *state.previous_pose), bias);
  const Pose2 rel_cur = scaled(pose_compose(kf_inv, true_pose), bias);
  const Pose2 delta = pose_compose(rel_prev.inverse(), rel_cur);

  std::optional<PseudoMeasurement> out;
  if (!(drop < params.dropout_probability_per_frame)) {
    const double dist = std::hypot(delta.x, delta.y);
    PseudoMeasurement m;
    m.source = Sensor::kThermal;
    m.stamp = stamp;
    m.v_meas = (delta.x < 0.0 ? -dist : dist) / dt + params.v_noise_sigma * v_noise;
    m.psi_dot_meas = delta.psi / dt + params.psi_dot_noise_sigma * psi_noise;
    m.noise = params.measurement_noise;
    out = m;
  }

  state.previous_pose = true_pose;
  if (++state.frames_since_keyframe >= params.keyframe_interval) {
    state.last_keyframe_pose = true_pose;
    state.frames_since_keyframe = 0;
  }
  return {std::move(state), out};
}

ThermalOdomParams thermal_quality(double level, const ThermalOdomParams& nominal) {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw InvalidArgument("thermal_quality: level must lie in [0, 1]");
  }
  ThermalOdomParams p = nominal;
  const double factor = 1.0 + level;
  p.dropout_probability_per_frame = std::min(1.0, nominal.dropout_probability_per_frame * factor);
  p.v_noise_sigma = nominal.v_noise_sigma * factor;
  return p;
}

}  // namespace tunnelfuse
