#include "tunnelfuse/errors.hpp"
#include "tunnelfuse/tunnel_map.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace tunnelfuse {
namespace {

MapConfig rectangle_loop() {
  MapConfig c;
  c.segments = {SegmentSpec::straight(50), SegmentSpec::arc(20, kPi / 2),
                SegmentSpec::straight(30), SegmentSpec::arc(20, kPi / 2),
                SegmentSpec::straight(50), SegmentSpec::arc(20, kPi / 2),
                SegmentSpec::straight(30), SegmentSpec::arc(20, kPi / 2)};
  c.closed_loop = true;
  c.feature_density = 0.5;
  c.seed = 3;
  return c;
}

TEST(BuildMap, StraightCenterline) {
  MapConfig c;
  c.segments = {SegmentSpec::straight(100.0)};
  const TunnelMap map = build_map(c);
  ASSERT_EQ(map.centerline().size(), 1001u);
  EXPECT_DOUBLE_EQ(map.total_length(), 100.0);
  for (std::size_t i = 0; i < map.centerline().size(); ++i) {
    const auto& s = map.centerline()[i];
    EXPECT_NEAR(s.s, 0.1 * static_cast<double>(i), 1e-9);
    EXPECT_NEAR(s.pose.x, s.s, 1e-9);
    EXPECT_EQ(s.pose.y, 0.0);
    EXPECT_EQ(s.pose.psi, 0.0);
  }
}

TEST(BuildMap, ArcGeometry) {
  MapConfig c;
  c.segments = {SegmentSpec::straight(10.0), SegmentSpec::arc(20.0, kPi / 2)};
  const TunnelMap map = build_map(c);
  EXPECT_NEAR(map.total_length(), 10.0 + 10.0 * kPi, 1e-12);
  const Pose2 end = map.pose_at(map.total_length());
  EXPECT_NEAR(end.x, 30.0, 1e-9);
  EXPECT_NEAR(end.y, 20.0, 1e-9);
  EXPECT_NEAR(end.psi, kPi / 2, 1e-12);
  EXPECT_DOUBLE_EQ(map.curvature_at(5.0), 0.0);
  EXPECT_DOUBLE_EQ(map.curvature_at(15.0), 1.0 / 20.0);

  c.segments[1] = SegmentSpec::arc(20.0, -kPi / 2);
  EXPECT_NEAR(build_map(c).pose_at(10.0 + 10.0 * kPi).y, -20.0, 1e-9);
}

TEST(BuildMap, ClosedLoopWraps) {
  const TunnelMap map = build_map(rectangle_loop());
  const double len = 160.0 + 40.0 * kPi;
  EXPECT_NEAR(map.total_length(), len, 1e-9);
  const Pose2 a = map.pose_at(12.0);
  const Pose2 b = map.pose_at(12.0 + len);
  EXPECT_NEAR(a.x, b.x, 1e-9);
  EXPECT_NEAR(a.y, b.y, 1e-9);
  EXPECT_NEAR(map.wrap_s(len + 3.0), 3.0, 1e-9);
  EXPECT_FALSE(map.features().empty());
}

TEST(BuildMap, FeaturesSitOnTheWalls) {
  const TunnelMap map = build_map(rectangle_loop());
  for (const auto& f : map.features()) {
    EXPECT_GT(f.center.z(), 0.0);
    EXPECT_LT(f.center.z(), map.wall_height());
    EXPECT_DOUBLE_EQ(f.half_size, kFeatureSize / 2);
  }
  // Density is boxes per metre of centerline.
  const double per_metre = static_cast<double>(map.features().size()) / map.total_length();
  EXPECT_NEAR(per_metre, 0.5, 0.1);
}

TEST(BuildMap, SameSeedSameFeatures) {
  const TunnelMap a = build_map(rectangle_loop());
  const TunnelMap b = build_map(rectangle_loop());
  ASSERT_EQ(a.features().size(), b.features().size());
  for (std::size_t i = 0; i < a.features().size(); ++i) {
    EXPECT_EQ(a.features()[i].center, b.features()[i].center);
  }
}

TEST(BuildMap, InvalidMaps) {
  MapConfig c;
  EXPECT_THROW(build_map(c), InvalidMap);
  c.segments = {SegmentSpec::straight(0.0)};
  EXPECT_THROW(build_map(c), InvalidMap);
  c.segments = {SegmentSpec::arc(3.0, kPi / 2)};
  EXPECT_THROW(build_map(c), InvalidMap);
  c.segments = {SegmentSpec::straight(100.0)};
  c.closed_loop = true;
  EXPECT_THROW(build_map(c), InvalidMap);
  MapConfig open = rectangle_loop();
  open.segments.back() = SegmentSpec::arc(20, kPi / 2 - 1e-3);
  EXPECT_THROW(build_map(open), InvalidMap);
}

TEST(TunnelMap, Locate) {
  MapConfig c;
  c.segments = {SegmentSpec::straight(10.0), SegmentSpec::arc(20.0, kPi / 2)};
  const TunnelMap map = build_map(c);
  const auto inside = map.locate(4.0, 1.0);
  ASSERT_TRUE(inside.has_value());
  EXPECT_EQ(inside->segment, 0u);
  EXPECT_NEAR(inside->s, 4.0, 1e-12);
  EXPECT_NEAR(inside->lateral, 1.0, 1e-12);
  EXPECT_FALSE(map.locate(4.0, 3.5).has_value());
  EXPECT_FALSE(map.locate(-1.0, 0.0).has_value());
  // On the arc, the lateral offset is measured toward its centre.
  const double ang = kPi / 4;
  const auto on_arc = map.locate(10.0 + 18.0 * std::sin(ang), 20.0 - 18.0 * std::cos(ang));
  ASSERT_TRUE(on_arc.has_value());
  EXPECT_EQ(on_arc->segment, 1u);
  EXPECT_NEAR(on_arc->lateral, 2.0, 1e-9);
  EXPECT_NEAR(on_arc->s, 10.0 + 20.0 * ang, 1e-9);
}

}  // namespace
}  // namespace tunnelfuse
