#pragma once

#include "tunnelfuse/trajectory.hpp"
#include "tunnelfuse/trajectory_log.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tunnelfuse {

/// Two-sided 95% acceptance region of a chi-square variable with 2 degrees of
/// freedom: the CDF is 1 - exp(-x/2), so the quantiles are -2 ln(0.975) and
/// -2 ln(0.025).
inline const double kNees2Lower95 = -2.0 * std::log(0.975);
inline const double kNees2Upper95 = -2.0 * std::log(0.025);

/// e^T P^-1 e; +infinity when P is not positive definite.
double nees_2d(const Eigen::Vector2d& error, const Eigen::Matrix2d& cov);

/// Truth at time t: linear in every channel except psi, which follows the
/// shorter arc. Samples hit exactly are returned unchanged. Throws
/// InvalidArgument outside the sampled span or for fewer than one sample.
StateVector interpolate_truth(std::span<const GroundTruthSample> truth, double t);

struct ErrorSample {
  double t = 0.0;
  StateVector truth;
  double position_error = 0.0;
  double heading_error = 0.0;  // wrapped estimate - truth
  double nees = 0.0;
};

struct ErrorReport {
  double position_rmse = 0.0;
  double max_position_error = 0.0;
  double final_position_error = 0.0;
  double heading_rmse = 0.0;
  double nees_mean = 0.0;
  double nees_fraction_inside = 0.0;
  std::vector<ErrorSample> series;
};

/// Compares every log record against interpolated truth. Throws
/// InvalidArgument for an empty log, empty truth, or log times outside the
/// truth span (1e-9 s slack).
ErrorReport compute_errors(const TrajectoryLog& log, std::span<const GroundTruthSample> truth);

/// Writes the per-record log CSV (9 significant digits). An empty log yields
/// the header alone. Throws IoError on write failure.
void export_csv(const TrajectoryLog& log, std::span<const GroundTruthSample> truth,
                const std::filesystem::path& path);

/// report.json content: the aggregate fields plus the error series.
std::string report_to_json(const ErrorReport& report, const std::string& scenario_name);
void write_report_json(const ErrorReport& report, const std::string& scenario_name,
                       const std::filesystem::path& path);

/// trajectory.svg, heading.svg and pos_error.svg in out_dir (created if
/// missing). Throws InvalidArgument for an empty log, IoError on failure.
void render_plots(const ErrorReport& report, const TrajectoryLog& log,
                  std::span<const GroundTruthSample> truth, const std::filesystem::path& out_dir);

}  // namespace tunnelfuse
