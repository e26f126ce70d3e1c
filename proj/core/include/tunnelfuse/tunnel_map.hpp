#pragma once

#include "tunnelfuse/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace tunnelfuse {

enum class SegmentType { kStraight, kArc };

/// Straight: `length` metres. Arc: `radius` metres, signed `angle` radians
/// (positive turns left).
struct SegmentSpec {
  SegmentType type = SegmentType::kStraight;
  double length = 0.0;
  double radius = 0.0;
  double angle = 0.0;

  static SegmentSpec straight(double length) { return {SegmentType::kStraight, length, 0.0, 0.0}; }
  static SegmentSpec arc(double radius, double angle) {
    return {SegmentType::kArc, 0.0, radius, angle};
  }
};

struct MapConfig {
  std::vector<SegmentSpec> segments;
  double half_width = 3.0;   // m
  double wall_height = 5.0;  // m
  double feature_density = 0.5;  // boxes per metre of centerline
  bool closed_loop = false;
  std::uint64_t seed = 0;
};

/// Centerline segment placed in the world frame.
struct PlacedSegment {
  SegmentSpec spec;
  Pose2 start;
  double s_begin = 0.0;
  double arc_length = 0.0;

  double curvature() const;
  /// Centerline pose at local arc length `ds` in [0, arc_length].
  Pose2 pose_at(double ds) const;
};

/// Wall-mounted feature: an axis-aligned cube in a frame yawed by `yaw`.
struct FeatureBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double half_size = 0.15;
};

struct CenterlineSample {
  double s = 0.0;
  Pose2 pose;
};

/// Where a horizontal position falls relative to the centerline.
struct MapLocation {
  std::size_t segment = 0;
  double s = 0.0;        // global arc length
  double lateral = 0.0;  // positive to the left
};

inline constexpr double kCenterlineSpacing = 0.1;  // m
inline constexpr double kFeatureSize = 0.3;        // m
inline constexpr double kClosureTolerance = 1e-6;

class TunnelMap {
 public:
  const MapConfig& config() const { return config_; }
  const std::vector<PlacedSegment>& segments() const { return segments_; }
  const std::vector<CenterlineSample>& centerline() const { return centerline_; }
  const std::vector<FeatureBox>& features() const { return features_; }
  double total_length() const { return total_length_; }
  double half_width() const { return config_.half_width; }
  double wall_height() const { return config_.wall_height; }
  bool closed_loop() const { return config_.closed_loop; }

  /// Global arc length to segment index; closed loops wrap, open maps clamp.
  std::size_t segment_index(double s) const;
  Pose2 pose_at(double s) const;
  double curvature_at(double s) const;
  /// Normalizes s into [0, total_length) for closed loops; unchanged otherwise.
  double wrap_s(double s) const;

  /// First segment whose footprint contains (x, y) strictly inside the walls.
  std::optional<MapLocation> locate(double x, double y) const;

 private:
  friend TunnelMap build_map(const MapConfig& config);

  MapConfig config_;
  std::vector<PlacedSegment> segments_;
  std::vector<CenterlineSample> centerline_;
  std::vector<FeatureBox> features_;
  double total_length_ = 0.0;
};

/// Places segments end to end from the origin heading +x, samples the
/// centerline every 0.1 m and scatters feature boxes on both walls. Throws
/// InvalidMap for non-positive lengths/radii, radius not exceeding the half
/// width, or a closed loop whose end pose misses the start by more than 1e-6.
TunnelMap build_map(const MapConfig& config);

}  // namespace tunnelfuse
