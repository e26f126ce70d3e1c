#include "tunnelfuse/errors.hpp"
#include "tunnelfuse/lidar_sim.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace tunnelfuse {
namespace {

GroundTruthSample sample_at(double x, double y, double psi) {
  GroundTruthSample s;
  s.state = StateVector(x, y, 0, 0, psi, 0, 0);
  return s;
}

TEST(Intersect, Primitives) {
  const Ray ray{Eigen::Vector3d(0, 0, 1), Eigen::Vector3d::UnitX()};

  RectPatch wall;
  wall.origin = {5, -1, 0};
  wall.u = Eigen::Vector3d::UnitY();
  wall.v = Eigen::Vector3d::UnitZ();
  wall.u_len = 2;
  wall.v_len = 2;
  EXPECT_DOUBLE_EQ(intersect(ray, wall), 5.0);
  wall.origin.y() = 0.5;
  EXPECT_TRUE(std::isinf(intersect(ray, wall)));

  CylinderPatch cyl;
  cyl.radius = 3.0;
  EXPECT_DOUBLE_EQ(intersect(ray, cyl), 3.0);
  cyl.theta0 = 0.5;
  cyl.span = 1.0;
  EXPECT_TRUE(std::isinf(intersect(ray, cyl)));

  AnnulusPatch floor;
  floor.r_min = 1.0;
  floor.r_max = 4.0;
  const Ray down{Eigen::Vector3d(2, 0, 1), -Eigen::Vector3d::UnitZ()};
  EXPECT_DOUBLE_EQ(intersect(down, floor), 1.0);

  FeatureBox box;
  box.center = {4, 0, 1};
  box.half_size = 0.5;
  EXPECT_NEAR(intersect(ray, box), 3.5, 1e-12);
  box.yaw = kPi / 4;
  EXPECT_NEAR(intersect(ray, box), 4.0 - 0.5 * std::sqrt(2.0), 1e-12);
}

TEST(RayDirections, LayoutAndUnitLength) {
  LidarModel m;
  m.horizontal_rays = 4;
  m.vertical_rays = 3;
  m.vertical_fov = deg_to_rad(40.0);
  const auto dirs = ray_directions(m);
  ASSERT_EQ(dirs.size(), 12u);
  for (const auto& d : dirs) EXPECT_NEAR(d.norm(), 1.0, 1e-15);
  EXPECT_NEAR(dirs[0].z(), std::sin(deg_to_rad(-20.0)), 1e-15);
  EXPECT_NEAR(dirs[1].z(), 0.0, 1e-15);
  EXPECT_NEAR(dirs[1].x(), 1.0, 1e-15);
  EXPECT_NEAR(dirs[1 * 3 + 1].y(), 1.0, 1e-15);  // column 1 looks left
}

TEST(RenderScan, CylinderRanges) {
  Scene scene;
  CylinderPatch cyl;
  cyl.center = {1.0, -2.0};
  cyl.radius = 3.0;
  scene.add(cyl);
  LidarModel m;
  m.horizontal_rays = 64;
  m.vertical_rays = 8;
  const Pose2 pose{0.5, -1.8, 0.3};
  std::mt19937_64 rng(1);
  const PointCloud scan = render_scan(scene, pose, m, 0.0, rng);
  ASSERT_EQ(scan.size(), 64u * 8u);
  const Transform3 to_world = Transform3::from_yaw(pose.psi, Eigen::Vector3d(pose.x, pose.y, m.mount_height));
  for (const auto& p : scan.points) {
    const Eigen::Vector3d w = to_world.apply(p);
    EXPECT_NEAR(std::hypot(w.x() - 1.0, w.y() + 2.0), 3.0, 1e-9);
  }
}

TEST(RenderScan, PlaneGridMatchesRayPlaneOracle) {
  Scene scene;
  RectPatch plane;
  plane.origin = {10, -50, -50};
  plane.u = Eigen::Vector3d::UnitY();
  plane.v = Eigen::Vector3d::UnitZ();
  plane.u_len = 100;
  plane.v_len = 100;
  scene.add(plane);
  LidarModel m;
  m.horizontal_rays = 8;
  m.vertical_rays = 2;
  m.vertical_fov = deg_to_rad(45.0);
  std::mt19937_64 rng(1);
  const PointCloud scan = render_scan(scene, Pose2{}, m, 0.0, rng);

  std::vector<Eigen::Vector3d> expected;
  for (int c = 0; c < 8; ++c) {
    const double az = 2.0 * kPi * c / 8;
    for (double el : {deg_to_rad(-22.5), deg_to_rad(22.5)}) {
      const Eigen::Vector3d d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      if (d.x() <= 1e-9) continue;
      const double t = 10.0 / d.x();
      if (t > m.max_range) continue;
      expected.push_back(t * d);
    }
  }
  ASSERT_EQ(expected.size(), 6u);
  ASSERT_EQ(scan.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_LT((scan.points[i] - expected[i]).norm(), 1e-9);
  }
}

TEST(RenderScan, AzimuthOffsetEqualsYawedSensor) {
  const TunnelMap map = testing::straight_tunnel(60.0, 3.0);
  const Scene scene = build_scene(map);
  LidarModel m;
  m.horizontal_rays = 128;
  m.vertical_rays = 8;
  const double delta = 0.4 * 2.0 * kPi / m.horizontal_rays;
  std::mt19937_64 rng(1);
  const PointCloud rotated = render_scan(map, scene, sample_at(25.0, 0.5, delta), m, 0.0, rng);
  m.azimuth_offset = delta;
  const PointCloud offset = render_scan(map, scene, sample_at(25.0, 0.5, 0.0), m, 0.0, rng);
  ASSERT_EQ(rotated.size(), offset.size());
  const Transform3 rz = Transform3::from_yaw(delta, Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < rotated.size(); ++i) {
    EXPECT_LT((rz.apply(rotated.points[i]) - offset.points[i]).norm(), 1e-9);
  }
}

TEST(RenderScan, RangeNoiseStatistics) {
  Scene scene;
  CylinderPatch cyl;
  cyl.radius = 5.0;
  scene.add(cyl);
  LidarModel m;
  m.horizontal_rays = 512;
  m.vertical_rays = 16;
  std::mt19937_64 clean_rng(1);
  std::mt19937_64 noisy_rng(2);
  const PointCloud clean = render_scan(scene, Pose2{}, m, 0.0, clean_rng);
  const PointCloud noisy = render_scan(scene, Pose2{}, m, 0.02, noisy_rng);
  ASSERT_EQ(clean.size(), noisy.size());
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double dr = noisy.points[i].norm() - clean.points[i].norm();
    // Noise moves the return along its own ray.
    EXPECT_LT((noisy.points[i].normalized() - clean.points[i].normalized()).norm(), 1e-12);
    sum += dr;
    sum2 += dr * dr;
  }
  const double n = static_cast<double>(clean.size());
  EXPECT_NEAR(sum / n, 0.0, 4.0 * 0.02 / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sum2 / n), 0.02, 0.02 * 0.05);
}

TEST(RenderScan, OutsideTunnelThrows) {
  const TunnelMap map = testing::straight_tunnel(20.0, 0.0);
  LidarModel m;
  m.horizontal_rays = 16;
  m.vertical_rays = 2;
  std::mt19937_64 rng(1);
  EXPECT_THROW(render_scan(map, sample_at(10.0, 4.0, 0.0), m, 0.0, rng), InvalidPose);
  m.mount_height = 6.0;
  EXPECT_THROW(render_scan(map, sample_at(10.0, 0.0, 0.0), m, 0.0, rng), InvalidPose);
}

TEST(RenderScan, TunnelReturnsStayInsideWalls) {
  const TunnelMap map = testing::straight_tunnel(60.0, 0.0);
  LidarModel m;
  m.horizontal_rays = 64;
  m.vertical_rays = 16;
  std::mt19937_64 rng(1);
  const PointCloud scan = render_scan(map, sample_at(30.0, 1.0, 0.2), m, 0.0, rng);
  const Transform3 to_world = Transform3::from_yaw(0.2, Eigen::Vector3d(30.0, 1.0, 1.5));
  ASSERT_FALSE(scan.empty());
  for (const auto& p : scan.points) {
    const Eigen::Vector3d w = to_world.apply(p);
    const bool on_wall = std::abs(std::abs(w.y()) - 3.0) < 1e-9;
    const bool on_floor_or_ceiling = std::abs(w.z()) < 1e-9 || std::abs(w.z() - 5.0) < 1e-9;
    const bool on_end = std::abs(w.x()) < 1e-9 || std::abs(w.x() - 60.0) < 1e-9;
    EXPECT_TRUE(on_wall || on_floor_or_ceiling || on_end) << w.transpose();
  }
}

}  // namespace
}  // namespace tunnelfuse
