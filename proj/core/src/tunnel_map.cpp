#include "tunnelfuse/tunnel_map.hpp"

#include "tunnelfuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace tunnelfuse {

namespace {

constexpr double kEdgeSlack = 1e-9;

// Angle from the turn centre to the segment start, and the centre itself.
struct ArcFrame {
  Eigen::Vector2d center;
  double phi0 = 0.0;
  double sign = 1.0;  // +1 left (ccw), -1 right (cw)
};

ArcFrame arc_frame(const PlacedSegment& seg) {
  ArcFrame f;
  f.sign = seg.spec.angle >= 0.0 ? 1.0 : -1.0;
  const Eigen::Vector2d left(-std::sin(seg.start.psi), std::cos(seg.start.psi));
  f.center = Eigen::Vector2d(seg.start.x, seg.start.y) + f.sign * seg.spec.radius * left;
  f.phi0 = seg.start.psi - f.sign * kPi / 2.0;
  return f;
}

std::string segment_label(std::size_t i) {
  return "segment " + std::to_string(i);
}

}  // namespace

double PlacedSegment::curvature() const {
  if (spec.type == SegmentType::kStraight) return 0.0;
  return (spec.angle >= 0.0 ? 1.0 : -1.0) / spec.radius;
}

Pose2 PlacedSegment::pose_at(double ds) const {
  if (spec.type == SegmentType::kStraight) {
    return {start.x + ds * std::cos(start.psi), start.y + ds * std::sin(start.psi), start.psi};
  }
  const ArcFrame f = arc_frame(*this);
  const double phi = f.phi0 + f.sign * ds / spec.radius;
  return {f.center.x() + spec.radius * std::cos(phi), f.center.y() + spec.radius * std::sin(phi),
          start.psi + f.sign * ds / spec.radius};
}

double TunnelMap::wrap_s(double s) const {
  if (!config_.closed_loop || total_length_ <= 0.0) return s;
  double w = std::fmod(s, total_length_);
  if (w < 0.0) w += total_length_;
  return w;
}

std::size_t TunnelMap::segment_index(double s) const {
  const double w = wrap_s(s);
  // Last segment whose s_begin <= w.
  auto it = std::upper_bound(segments_.begin(), segments_.end(), w,
                             [](double v, const PlacedSegment& seg) { return v < seg.s_begin; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(segments_.begin(), it) - 1);
}

Pose2 TunnelMap::pose_at(double s) const {
  const double w = wrap_s(s);
  const PlacedSegment& seg = segments_[segment_index(w)];
  const double ds = std::clamp(w - seg.s_begin, 0.0, seg.arc_length);
  // Beyond the end of an open map the last segment is extrapolated.
  const double extra = config_.closed_loop ? 0.0 : std::max(0.0, w - total_length_);
  Pose2 p = seg.pose_at(ds + extra);
  p.psi = wrap_angle(p.psi);
  return p;
}

double TunnelMap::curvature_at(double s) const {
  return segments_[segment_index(s)].curvature();
}

std::optional<MapLocation> TunnelMap::locate(double x, double y) const {
  const double w = config_.half_width;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const PlacedSegment& seg = segments_[i];
    double ds = 0.0;
    double lateral = 0.0;
    if (seg.spec.type == SegmentType::kStraight) {
      const double c = std::cos(seg.start.psi);
      const double s = std::sin(seg.start.psi);
      const double dx = x - seg.start.x;
      const double dy = y - seg.start.y;
      ds = c * dx + s * dy;
      lateral = -s * dx + c * dy;
    } else {
      const ArcFrame f = arc_frame(seg);
      const Eigen::Vector2d d = Eigen::Vector2d(x, y) - f.center;
      const double r = d.norm();
      lateral = f.sign * (seg.spec.radius - r);
      double dphi = std::remainder(f.sign * (std::atan2(d.y(), d.x()) - f.phi0), 2.0 * kPi);
      if (dphi < -kEdgeSlack) dphi += 2.0 * kPi;
      ds = dphi * seg.spec.radius;
    }
    if (ds >= -kEdgeSlack && ds <= seg.arc_length + kEdgeSlack && std::abs(lateral) < w) {
      return MapLocation{i, seg.s_begin + std::clamp(ds, 0.0, seg.arc_length), lateral};
    }
  }
  return std::nullopt;
}

TunnelMap build_map(const MapConfig& config) {
  if (config.segments.empty()) throw InvalidMap("map has no segments");
  if (!(config.half_width > 0.0)) throw InvalidMap("half_width must be positive");
  if (!(config.wall_height > 0.0)) throw InvalidMap("wall_height must be positive");
  if (!(config.feature_density >= 0.0)) throw InvalidMap("feature_density must be >= 0");
  if (config.wall_height <= kFeatureSize) throw InvalidMap("wall_height too small for features");

  TunnelMap map;
  map.config_ = config;
  Pose2 cursor;
  double s = 0.0;
  for (std::size_t i = 0; i < config.segments.size(); ++i) {
    const SegmentSpec& spec = config.segments[i];
    PlacedSegment seg;
    seg.spec = spec;
    seg.start = cursor;
    seg.s_begin = s;
    if (spec.type == SegmentType::kStraight) {
      if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
        throw InvalidMap(segment_label(i) + ": length must be positive");
      }
      seg.arc_length = spec.length;
    } else {
      if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) {
        throw InvalidMap(segment_label(i) + ": radius must be positive");
      }
      if (spec.radius <= config.half_width) {
        throw InvalidMap(segment_label(i) + ": radius must exceed the tunnel half width");
      }
      if (!(spec.angle != 0.0) || !std::isfinite(spec.angle) || std::abs(spec.angle) > 2.0 * kPi) {
        throw InvalidMap(segment_label(i) + ": arc angle must be non-zero and at most 2 pi");
      }
      seg.arc_length = spec.radius * std::abs(spec.angle);
    }
    cursor = seg.pose_at(seg.arc_length);
    s += seg.arc_length;
    map.segments_.push_back(seg);
  }
  map.total_length_ = s;

  if (config.closed_loop) {
    const double dx = cursor.x;
    const double dy = cursor.y;
    const double dpsi = std::remainder(cursor.psi, 2.0 * kPi);
    if (std::hypot(dx, dy) > kClosureTolerance || std::abs(dpsi) > kClosureTolerance) {
      std::ostringstream msg;
      msg << "closed_loop requested but the centerline ends at (" << dx << ", " << dy
          << ", " << cursor.psi << ")";
      throw InvalidMap(msg.str());
    }
  }

  // Samples at multiples of the spacing, plus the exact end point.
  const auto n = static_cast<std::size_t>(std::floor(s / kCenterlineSpacing + 1e-9));
  map.centerline_.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) {
    const double sk = std::min(s, static_cast<double>(k) * kCenterlineSpacing);
    map.centerline_.push_back({sk, map.pose_at(sk)});
  }
  if (s - map.centerline_.back().s > 1e-9) map.centerline_.push_back({s, map.pose_at(s)});

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> along(0.0, s);
  std::uniform_real_distribution<double> height(0.5 * kFeatureSize,
                                                config.wall_height - 0.5 * kFeatureSize);
  std::bernoulli_distribution left_side(0.5);
  const auto count = static_cast<std::size_t>(std::llround(config.feature_density * s));
  map.features_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double fs = along(rng);
    const double side = left_side(rng) ? 1.0 : -1.0;
    const double z = height(rng);
    const Pose2 p = map.pose_at(fs);
    const double offset = side * (config.half_width - 0.5 * kFeatureSize);
    FeatureBox box;
    box.center = {p.x - offset * std::sin(p.psi), p.y + offset * std::cos(p.psi), z};
    box.yaw = p.psi;
    box.half_size = 0.5 * kFeatureSize;
    map.features_.push_back(box);
  }
  return map;
}

}  // namespace tunnelfuse
