#pragma once

#include "tunnelfuse/geometry.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>
#include <vector>

namespace tunnelfuse {

/// What produced the state of a log record.
enum class UpdateSource { kInitial, kPrediction, kLidar, kThermal };

std::string_view to_string(UpdateSource s);
std::optional<UpdateSource> update_source_from_string(std::string_view s);

struct TrajectoryRecord {
  Timestamp stamp;
  StateVector state;
  StateVec cov_diagonal = StateVec::Zero();
  /// Off-diagonal (x, y) covariance. Not part of the CSV schema, so logs read
  /// back from disk leave it empty.
  std::optional<double> cov_xy;
  UpdateSource source = UpdateSource::kPrediction;
  std::optional<Eigen::Vector2d> innovation;

  Eigen::Matrix2d position_covariance() const {
    Eigen::Matrix2d p;
    const double xy = cov_xy.value_or(0.0);
    p << cov_diagonal[kX], xy, xy, cov_diagonal[kY];
    return p;
  }
};

/// Time-ordered filter output; timestamps strictly increasing.
struct TrajectoryLog {
  std::vector<TrajectoryRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

}  // namespace tunnelfuse
