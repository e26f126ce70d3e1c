#pragma once

#include "tunnelfuse/ekf.hpp"
#include "tunnelfuse/lidar_sim.hpp"
#include "tunnelfuse/measurement.hpp"
#include "tunnelfuse/registration.hpp"
#include "tunnelfuse/thermal_odometry.hpp"
#include "tunnelfuse/trajectory.hpp"
#include "tunnelfuse/tunnel_map.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace tunnelfuse {

struct OutageWindow {
  Sensor sensor = Sensor::kLidar;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Sensor-off intervals, closed on both ends.
class OutageSchedule {
 public:
  OutageSchedule() = default;
  /// Throws InvalidArgument when start >= end or two windows of the same
  /// sensor overlap.
  explicit OutageSchedule(std::vector<OutageWindow> windows);

  bool suppressed(Sensor sensor, double t) const;
  const std::vector<OutageWindow>& windows() const { return windows_; }

 private:
  std::vector<OutageWindow> windows_;
};

struct TrajectoryConfig {
  std::vector<SpeedTarget> speed_profile{{0.0, 2.0}};
  double accel_limit = 0.5;       // m/s^2
  double sample_rate_hz = 100.0;  // ground-truth export rate
  double duration_s = 60.0;
};

struct LidarConfig {
  LidarModel model;
  double rate_hz = 10.0;
  double range_noise_sigma = 0.02;  // m
  /// Start every sweep at a uniformly drawn azimuth phase within one column.
  bool random_azimuth_phase = true;
  RegistrationParams registration;
  /// Pseudo-measurement covariance for a perfect fit (v, psi_dot variances).
  Eigen::Matrix2d base_noise = Eigen::Vector2d(0.05 * 0.05, 0.01 * 0.01).asDiagonal();
  double cost_scale = 0.05;  // m^2
};

struct ThermalConfig {
  ThermalOdomParams params;
  double degradation_level = 0.0;
};

struct FilterConfig {
  ProcessNoiseParams process;
  StateVec initial_cov_diag = default_initial_covariance_diagonal();
  double ts_max = 0.01;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  MapConfig map;
  TrajectoryConfig trajectory;
  LidarConfig lidar;
  ThermalConfig thermal;
  std::vector<OutageWindow> outages;
  FilterConfig filter;
};

/// Independent random stream for one consumer of the scenario seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Per-scan registration outcome for scans that produced (or tried to
/// produce) a LiDAR measurement.
struct LidarFrameDiagnostics {
  std::size_t frame = 0;
  Timestamp stamp;
  bool failed = false;
  bool degenerate = false;
  double alpha = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  Transform3 transform;
};

struct ScenarioResult {
  TunnelMap map;
  std::vector<GroundTruthSample> truth;
  std::vector<PseudoMeasurement> events;
  std::vector<LidarFrameDiagnostics> lidar_frames;
  std::size_t thermal_dropouts = 0;
};

struct ScenarioHooks {
  /// Receives every rendered scan with its frame index.
  std::function<void(std::size_t, const PointCloud&)> scan_sink;
  /// Called after each LiDAR frame with (frames done, frames total).
  std::function<void(std::size_t, std::size_t)> progress;
  /// When false no scans are rendered and no LiDAR measurements are produced.
  bool lidar_enabled = true;
};

/// Trajectory, LiDAR scans and registration, thermal steps, outage gating and
/// the merged, sorted event stream. LiDAR frames inside an outage window are
/// not rendered, except the last one, which the first frame after the window
/// registers against.
ScenarioResult run_scenario(const ScenarioConfig& config, const ScenarioHooks& hooks = {});

/// Ground truth only; cheap because the trajectory is closed-form.
std::vector<GroundTruthSample> scenario_truth(const ScenarioConfig& config);

/// Filter start: truth at t = 0 perturbed by a draw from the configured
/// initial covariance, seeded from the scenario seed.
std::pair<StateVector, CovarianceMatrix> initial_filter_state(const ScenarioConfig& config,
                                                              const StateVector& truth0);

FilterOptions filter_options(const ScenarioConfig& config);

}  // namespace tunnelfuse
