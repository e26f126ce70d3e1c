#include "tunnelfuse/scenario.hpp"

#include "tunnelfuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace tunnelfuse {

namespace {

enum Stream : std::uint64_t {
  kMapStream = 1,
  kLidarNoiseStream = 2,
  kThermalStream = 3,
  kInitialStateStream = 4,
};

TunnelMap scenario_map(const ScenarioConfig& config) {
  MapConfig mc = config.map;
  mc.seed = derive_seed(config.seed, kMapStream);
  return build_map(mc);
}

// Frames at k / rate strictly before the end of the run.
std::size_t frame_count(double duration, double rate) {
  return static_cast<std::size_t>(std::ceil(duration * rate - 1e-9));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

OutageSchedule::OutageSchedule(std::vector<OutageWindow> windows) : windows_(std::move(windows)) {
  for (const auto& w : windows_) {
    if (!std::isfinite(w.start_s) || !std::isfinite(w.end_s) || !(w.start_s < w.end_s)) {
      throw InvalidArgument("outage window must have finite start < end");
    }
  }
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    for (std::size_t j = i + 1; j < windows_.size(); ++j) {
      const auto& a = windows_[i];
      const auto& b = windows_[j];
      if (a.sensor == b.sensor && a.start_s <= b.end_s && b.start_s <= a.end_s) {
        throw InvalidArgument("outage windows of " + std::string(to_string(a.sensor)) +
                              " overlap");
      }
    }
  }
}

bool OutageSchedule::suppressed(Sensor sensor, double t) const {
  return std::any_of(windows_.begin(), windows_.end(), [&](const OutageWindow& w) {
    return w.sensor == sensor && t >= w.start_s && t <= w.end_s;
  });
}

std::vector<GroundTruthSample> scenario_truth(const ScenarioConfig& config) {
  const TunnelMap map = scenario_map(config);
  const auto& tc = config.trajectory;
  return generate_trajectory(map, tc.speed_profile, tc.accel_limit, tc.sample_rate_hz,
                             tc.duration_s);
}

ScenarioResult run_scenario(const ScenarioConfig& config, const ScenarioHooks& hooks) {
  const OutageSchedule outages(config.outages);
  if (!(config.lidar.rate_hz > 0.0)) throw InvalidArgument("lidar rate must be positive");
  config.lidar.model.validate();

  ScenarioResult result{scenario_map(config), {}, {}, {}, 0};
  const TunnelMap& map = result.map;
  const auto& tc = config.trajectory;
  const Trajectory trajectory(map, tc.speed_profile, tc.accel_limit);
  result.truth = sample_trajectory(trajectory, tc.sample_rate_hz, tc.duration_s);

  std::vector<PseudoMeasurement> lidar_events;
  if (hooks.lidar_enabled) {
    const Scene scene = build_scene(map);
    std::mt19937_64 noise_rng(derive_seed(config.seed, kLidarNoiseStream));
    const double dt = 1.0 / config.lidar.rate_hz;
    const std::size_t n = frame_count(tc.duration_s, config.lidar.rate_hz);
    std::optional<PreparedCloud> previous;
    Transform3 guess = Transform3::identity();
    std::uniform_real_distribution<double> phase(
        0.0, 2.0 * kPi / config.lidar.model.horizontal_rays);
    LidarModel model = config.lidar.model;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * dt;
      const bool registers = k > 0 && !outages.suppressed(Sensor::kLidar, t);
      // A disabled sensor produces no scans; only a frame that is registered
      // itself or serves as the target of the next registration is rendered.
      if (!registers && !(k + 1 < n && !outages.suppressed(Sensor::kLidar, t + dt))) {
        previous.reset();
        if (hooks.progress) hooks.progress(k + 1, n);
        continue;
      }
      const GroundTruthSample sample{Timestamp{t}, trajectory.state_at(t)};
      if (config.lidar.random_azimuth_phase) model.azimuth_offset = phase(noise_rng);
      const PointCloud scan =
          render_scan(map, scene, sample, model, config.lidar.range_noise_sigma, noise_rng);
      if (hooks.scan_sink) hooks.scan_sink(k, scan);
      std::optional<PreparedCloud> current;
      try {
        current = prepare_cloud(scan, config.lidar.registration);
      } catch (const RegistrationFailed&) {
        // Leaves this frame without a usable target as well.
      }
      if (registers) {
        LidarFrameDiagnostics diag;
        diag.frame = k;
        diag.stamp = Timestamp{t};
        try {
          if (!current || !previous) throw RegistrationFailed("too few points in scan");
          const RegistrationResult reg =
              register_clouds(*current, *previous, guess, config.lidar.registration);
          diag.degenerate = reg.degenerate;
          diag.alpha = reg.alpha;
          diag.final_cost = reg.final_cost;
          diag.iterations = reg.iterations;
          diag.transform = reg.transform;
          lidar_events.push_back(odometry_to_pseudo(reg, dt, config.lidar.base_noise,
                                                    config.lidar.cost_scale, Timestamp{t}));
          // Constant-velocity guess for the next pair.
          guess = reg.transform;
        } catch (const RegistrationFailed&) {
          diag.failed = true;
        } catch (const DegenerateOrientation&) {
          diag.failed = true;
        }
        result.lidar_frames.push_back(diag);
      }
      previous = std::move(current);
      if (hooks.progress) hooks.progress(k + 1, n);
    }
  }

  std::vector<PseudoMeasurement> thermal_events;
  {
    const ThermalOdomParams params =
        thermal_quality(config.thermal.degradation_level, config.thermal.params);
    ThermalOdomState state =
        ThermalOdomState::initial(params, derive_seed(config.seed, kThermalStream));
    const double dt = 1.0 / params.frame_rate;
    const std::size_t n = frame_count(tc.duration_s, params.frame_rate);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * dt;
      auto [next, meas] = thermal_step(std::move(state), trajectory.pose_at(t), dt,
                                       Timestamp{t}, params);
      state = std::move(next);
      if (k > 0 && !meas) ++result.thermal_dropouts;
      if (meas && !outages.suppressed(Sensor::kThermal, t)) thermal_events.push_back(*meas);
    }
  }

  result.events = std::move(lidar_events);
  result.events.insert(result.events.end(), thermal_events.begin(), thermal_events.end());
  std::stable_sort(result.events.begin(), result.events.end(), event_before);
  return result;
}

std::pair<StateVector, CovarianceMatrix> initial_filter_state(const ScenarioConfig& config,
                                                              const StateVector& truth0) {
  const StateVec& diag = config.filter.initial_cov_diag;
  if (!(diag.array() > 0.0).all()) {
    throw InvalidArgument("initial covariance diagonal must be positive");
  }
  std::mt19937_64 rng(derive_seed(config.seed, kInitialStateStream));
  std::normal_distribution<double> unit(0.0, 1.0);
  StateVec x = truth0.vector();
  for (int i = 0; i < kStateDim; ++i) x[i] += std::sqrt(diag[i]) * unit(rng);
  return {StateVector(x), CovarianceMatrix::from_diagonal(diag)};
}

FilterOptions filter_options(const ScenarioConfig& config) {
  FilterOptions o;
  o.ts_max = config.filter.ts_max;
  o.process = config.filter.process;
  o.end_time = config.trajectory.duration_s;
  return o;
}

}  // namespace tunnelfuse
