#pragma once

#include "tunnelfuse/geometry.hpp"
#include "tunnelfuse/tunnel_map.hpp"

#include <vector>

namespace tunnelfuse {

/// Target speed that applies from time `t` until the next entry.
struct SpeedTarget {
  double t = 0.0;      // s
  double speed = 0.0;  // m/s
};

struct GroundTruthSample {
  Timestamp stamp;
  StateVector state;
};

/// Vehicle driving the centerline. Speed follows the target profile with
/// constant-acceleration ramps; all quantities are closed-form in t.
class Trajectory {
 public:
  /// Throws InvalidArgument for accel_limit <= 0, negative speeds, an empty
  /// profile, a profile not starting at t = 0 or not strictly increasing in t.
  Trajectory(const TunnelMap& map, std::vector<SpeedTarget> profile, double accel_limit);

  double speed_at(double t) const;
  double accel_at(double t) const;
  /// Distance travelled along the centerline since t = 0.
  double distance_at(double t) const;
  /// Throws InvalidArgument for t < 0, or when an open map's end is passed.
  StateVector state_at(double t) const;
  Pose2 pose_at(double t) const;

  /// Times at which the acceleration changes.
  std::vector<double> ramp_breakpoints() const;

 private:
  struct Phase {
    double t0 = 0.0;
    double v0 = 0.0;
    double s0 = 0.0;
    double a = 0.0;
  };
  const Phase& phase_at(double t) const;

  const TunnelMap* map_;
  std::vector<Phase> phases_;
};

/// Samples at k / sample_rate for k = 0 .. floor(duration * sample_rate).
std::vector<GroundTruthSample> generate_trajectory(const TunnelMap& map,
                                                   const std::vector<SpeedTarget>& profile,
                                                   double accel_limit, double sample_rate,
                                                   double duration);

std::vector<GroundTruthSample> sample_trajectory(const Trajectory& trajectory,
                                                 double sample_rate, double duration);

}  // namespace tunnelfuse
