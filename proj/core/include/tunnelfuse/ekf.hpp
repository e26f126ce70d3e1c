#pragma once

#include "tunnelfuse/geometry.hpp"
#include "tunnelfuse/measurement.hpp"
#include "tunnelfuse/trajectory_log.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tunnelfuse {

using MeasurementMatrix = Eigen::Matrix<double, 2, kStateDim>;
using GainMatrix = Eigen::Matrix<double, kStateDim, 2>;

/// White-jerk process noise intensities.
struct ProcessNoiseParams {
  double jerk_spectral_density = 0.5;      // (m/s^3)^2 / Hz
  double yaw_jerk_spectral_density = 0.2;  // (rad/s^3)^2 / Hz
};

/// Position rows of R_k get this floor (times Ts) so R_k stays SPD.
inline constexpr double kPositionNoiseFloor = 1e-9;
/// Innovation covariances above this condition number are not inverted.
inline constexpr double kMaxInnovationCondition = 1e12;

/// Default initial covariance diagonal: x, y, v, v_dot, psi, psi_dot, psi_ddot.
StateVec default_initial_covariance_diagonal();

/// Continuous constant-acceleration model:
/// (v cos psi, v sin psi, v_dot, 0, psi_dot, psi_ddot, 0).
StateVec dynamics(const StateVector& x);

/// Third-order Taylor step of the continuous model over `ts` seconds, with
/// v_ddot = 0 and psi_dddot = 0. Throws InvalidArgument for ts <= 0.
StateVector discretize(const StateVector& x, double ts);

/// Analytic Jacobian d discretize / d x.
StateMat jacobian_discrete(const StateVector& x, double ts);

/// Discretized white-jerk covariance R_k for a step of `ts` seconds.
StateMat process_noise(double ts, const ProcessNoiseParams& params);

std::pair<StateVector, CovarianceMatrix> predict(const StateVector& state,
                                                 const CovarianceMatrix& cov,
                                                 double ts,
                                                 const ProcessNoiseParams& params);

/// Selector of (v, psi_dot); the same matrix for both odometry sources.
MeasurementMatrix measurement_matrix(Sensor source);

struct FilterStep {
  StateVector prior_state;
  CovarianceMatrix prior_cov;
  StateVector posterior_state;
  CovarianceMatrix posterior_cov;
  GainMatrix gain = GainMatrix::Zero();
  Eigen::Vector2d innovation = Eigen::Vector2d::Zero();
  /// Empty for prediction-only steps.
  std::optional<Sensor> source;
  Timestamp stamp;
};

/// Kalman correction with a (v, psi_dot) pseudo-measurement. Throws
/// SingularUpdate if the innovation covariance is numerically singular.
FilterStep correct(const StateVector& state, const CovarianceMatrix& cov,
                   const PseudoMeasurement& meas);

struct FilterOptions {
  double ts_max = 0.01;
  ProcessNoiseParams process;
  /// Log end time; the log always reaches at least the last event.
  std::optional<double> end_time;
};

struct SkippedUpdate {
  Timestamp stamp;
  Sensor source = Sensor::kLidar;
  double condition = 0.0;
};

struct FilterRun {
  /// Every predict/correct step in execution order.
  std::vector<FilterStep> steps;
  /// One record per distinct timestamp, carrying the last posterior there.
  TrajectoryLog log;
  std::vector<SkippedUpdate> skipped;

  std::size_t correction_count() const;
};

/// Event-driven multi-rate filter. Between events it predicts in steps of at
/// most `ts_max`; at an event it predicts to the event time and corrects.
/// Throws InvalidArgument for unsorted events or out-of-range timestamps.
FilterRun run_filter(std::span<const PseudoMeasurement> events,
                     const StateVector& initial_state,
                     const CovarianceMatrix& initial_cov,
                     const FilterOptions& options);

}  // namespace tunnelfuse
