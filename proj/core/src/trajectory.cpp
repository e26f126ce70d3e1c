#include "tunnelfuse/trajectory.hpp"

#include "tunnelfuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tunnelfuse {

Trajectory::Trajectory(const TunnelMap& map, std::vector<SpeedTarget> profile,
                       double accel_limit)
    : map_(&map) {
  if (!(accel_limit > 0.0) || !std::isfinite(accel_limit)) {
    throw InvalidArgument("trajectory: accel_limit must be positive");
  }
  if (profile.empty()) throw InvalidArgument("trajectory: empty speed profile");
  if (profile.front().t != 0.0) {
    throw InvalidArgument("trajectory: speed profile must start at t = 0");
  }
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!(profile[i].speed >= 0.0) || !std::isfinite(profile[i].speed)) {
      throw InvalidArgument("trajectory: speeds must be finite and >= 0");
    }
    if (i > 0 && !(profile[i].t > profile[i - 1].t)) {
      throw InvalidArgument("trajectory: speed profile times must increase strictly");
    }
  }

  // The vehicle starts at the first target speed. Each later target starts a
  // ramp from wherever the speed is at that moment.
  double v = profile.front().speed;
  double s = 0.0;
  const auto push = [&](double t0, double a) {
    if (!phases_.empty() && phases_.back().t0 == t0) phases_.pop_back();
    phases_.push_back({t0, v, s, a});
  };
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double t0 = profile[i].t;
    const double t_end = i + 1 < profile.size() ? profile[i + 1].t
                                                : std::numeric_limits<double>::infinity();
    const double target = profile[i].speed;
    double t = t0;
    if (target != v) {
      const double a = target > v ? accel_limit : -accel_limit;
      push(t, a);
      const double ramp = std::abs(target - v) / accel_limit;
      const double dt = std::min(ramp, t_end - t);
      s += v * dt + 0.5 * a * dt * dt;
      v = dt == ramp ? target : v + a * dt;
      t += dt;
    }
    if (t < t_end) {
      push(t, 0.0);
      if (std::isfinite(t_end)) s += v * (t_end - t);
    }
  }
}

const Trajectory::Phase& Trajectory::phase_at(double t) const {
  auto it = std::upper_bound(phases_.begin(), phases_.end(), t,
                             [](double v, const Phase& p) { return v < p.t0; });
  if (it == phases_.begin()) return phases_.front();
  return *std::prev(it);
}

double Trajectory::speed_at(double t) const {
  const Phase& p = phase_at(t);
  return p.v0 + p.a * (t - p.t0);
}

double Trajectory::accel_at(double t) const { return phase_at(t).a; }

double Trajectory::distance_at(double t) const {
  const Phase& p = phase_at(t);
  const double tau = t - p.t0;
  return p.s0 + p.v0 * tau + 0.5 * p.a * tau * tau;
}

Pose2 Trajectory::pose_at(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("trajectory: t must be >= 0");
  const double s = distance_at(t);
  if (!map_->closed_loop() && s > map_->total_length() + 1e-9) {
    throw InvalidArgument("trajectory: vehicle passes the end of an open map at t = " +
                          std::to_string(t));
  }
  return map_->pose_at(s);
}

StateVector Trajectory::state_at(double t) const {
  const Pose2 p = pose_at(t);
  const double s = distance_at(t);
  const double v = speed_at(t);
  const double a = accel_at(t);
  const double kappa = map_->curvature_at(std::min(s, map_->total_length()));
  StateVec x;
  x << p.x, p.y, v, a, p.psi, v * kappa, a * kappa;
  return StateVector(x);
}

std::vector<double> Trajectory::ramp_breakpoints() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < phases_.size(); ++i) out.push_back(phases_[i].t0);
  return out;
}

std::vector<GroundTruthSample> sample_trajectory(const Trajectory& trajectory,
                                                 double sample_rate, double duration) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw InvalidArgument("trajectory: sample_rate must be positive");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("trajectory: duration must be >= 0");
  }
  const auto n = static_cast<std::size_t>(std::floor(duration * sample_rate + 1e-9));
  std::vector<GroundTruthSample> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / sample_rate;
    out.push_back({Timestamp{t}, trajectory.state_at(t)});
  }
  return out;
}

std::vector<GroundTruthSample> generate_trajectory(const TunnelMap& map,
                                                   const std::vector<SpeedTarget>& profile,
                                                   double accel_limit, double sample_rate,
                                                   double duration) {
  const Trajectory trajectory(map, profile, accel_limit);
  return sample_trajectory(trajectory, sample_rate, duration);
}

}  // namespace tunnelfuse
