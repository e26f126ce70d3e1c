#pragma once

#include "tunnelfuse/measurement.hpp"
#include "tunnelfuse/trajectory.hpp"
#include "tunnelfuse/trajectory_log.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tunnelfuse {

/// printf "%.<digits>g" rendering used by every text artifact.
std::string format_number(double v, int significant_digits);

inline constexpr const char* kEventsHeader = "t,source,v_meas,psi_dot_meas,q00,q01,q11";
inline constexpr const char* kTruthHeader = "t,x,y,v,v_dot,psi,psi_dot,psi_ddot";
inline constexpr const char* kLogHeader =
    "t,x_true,y_true,psi_true,x_est,y_est,psi_est,v_est,psi_dot_est,err_pos,err_psi,nees,P_xx,"
    "P_yy,source";

/// Events and truth are written with 17 significant digits so a file
/// round-trip is lossless.
void write_events_csv(const std::filesystem::path& path,
                      std::span<const PseudoMeasurement> events);
/// Rows come back in file order; ordering is not checked here. Throws IoError
/// for unreadable files, a wrong header, malformed rows or non-finite values.
std::vector<PseudoMeasurement> read_events_csv(const std::filesystem::path& path);

void write_truth_csv(const std::filesystem::path& path,
                     std::span<const GroundTruthSample> truth);
std::vector<GroundTruthSample> read_truth_csv(const std::filesystem::path& path);

/// Reads a log written by export_csv. Only the estimate columns are used:
/// v_dot and psi_ddot come back as 0, the covariance diagonal carries P_xx and
/// P_yy only, and cov_xy stays empty.
TrajectoryLog read_log_csv(const std::filesystem::path& path);

/// Splits one CSV line on commas (no quoting in these formats).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace tunnelfuse
