#include "tunnelfuse/lidar_sim.hpp"

#include "tunnelfuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tunnelfuse {

namespace {

constexpr double kMinHit = 1e-9;
constexpr double kSlack = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_sector(double x, double y, double theta0, double span) {
  if (span >= 2.0 * kPi) return true;
  double d = std::remainder(std::atan2(y, x) - theta0, 2.0 * kPi);
  if (d < -kSlack) d += 2.0 * kPi;
  return d <= span + kSlack;
}

Aabb bounds_of(const RectPatch& p) {
  Aabb b;
  for (double a : {0.0, p.u_len}) {
    for (double c : {0.0, p.v_len}) b.extend(p.origin + a * p.u + c * p.v);
  }
  return b;
}

Aabb bounds_of(const CylinderPatch& p) {
  Aabb b;
  b.min = {p.center.x() - p.radius, p.center.y() - p.radius, p.z_min};
  b.max = {p.center.x() + p.radius, p.center.y() + p.radius, p.z_max};
  return b;
}

Aabb bounds_of(const AnnulusPatch& p) {
  Aabb b;
  b.min = {p.center.x() - p.r_max, p.center.y() - p.r_max, p.z};
  b.max = {p.center.x() + p.r_max, p.center.y() + p.r_max, p.z};
  return b;
}

}  // namespace

void Aabb::extend(const Eigen::Vector3d& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

double Aabb::distance(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d d = (min - p).cwiseMax(p - max).cwiseMax(0.0);
  return d.norm();
}

double intersect(const Ray& ray, const RectPatch& patch) {
  const Eigen::Vector3d n = patch.u.cross(patch.v);
  const double denom = n.dot(ray.direction);
  if (std::abs(denom) < 1e-15) return kInf;
  const double t = n.dot(patch.origin - ray.origin) / denom;
  if (!(t > kMinHit)) return kInf;
  const Eigen::Vector3d rel = ray.origin + t * ray.direction - patch.origin;
  const double a = rel.dot(patch.u);
  const double b = rel.dot(patch.v);
  if (a < -kSlack || a > patch.u_len + kSlack || b < -kSlack || b > patch.v_len + kSlack) {
    return kInf;
  }
  return t;
}

double intersect(const Ray& ray, const CylinderPatch& patch) {
  const Eigen::Vector2d o = ray.origin.head<2>() - patch.center;
  const Eigen::Vector2d d = ray.direction.head<2>();
  const double a = d.squaredNorm();
  if (a < 1e-18) return kInf;
  const double b = 2.0 * o.dot(d);
  const double c = o.squaredNorm() - patch.radius * patch.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kInf;
  // Numerically stable pair of roots.
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double t1 = q / a;
  double t2 = q != 0.0 ? c / q : t1;
  if (t1 > t2) std::swap(t1, t2);
  for (double t : {t1, t2}) {
    if (!(t > kMinHit)) continue;
    const Eigen::Vector3d p = ray.origin + t * ray.direction;
    if (p.z() < patch.z_min - kSlack || p.z() > patch.z_max + kSlack) continue;
    if (!in_sector(p.x() - patch.center.x(), p.y() - patch.center.y(), patch.theta0, patch.span)) {
      continue;
    }
    return t;
  }
  return kInf;
}

double intersect(const Ray& ray, const AnnulusPatch& patch) {
  const double dz = ray.direction.z();
  if (std::abs(dz) < 1e-15) return kInf;
  const double t = (patch.z - ray.origin.z()) / dz;
  if (!(t > kMinHit)) return kInf;
  const double x = ray.origin.x() + t * ray.direction.x() - patch.center.x();
  const double y = ray.origin.y() + t * ray.direction.y() - patch.center.y();
  const double r = std::hypot(x, y);
  if (r < patch.r_min - kSlack || r > patch.r_max + kSlack) return kInf;
  if (!in_sector(x, y, patch.theta0, patch.span)) return kInf;
  return t;
}

double intersect(const Ray& ray, const FeatureBox& box) {
  // Slab test in the box frame.
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Eigen::Vector3d rel = ray.origin - box.center;
  const Eigen::Vector3d o(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(), rel.z());
  const Eigen::Vector3d d(c * ray.direction.x() + s * ray.direction.y(),
                          -s * ray.direction.x() + c * ray.direction.y(), ray.direction.z());
  double t_near = -kInf;
  double t_far = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (std::abs(o[i]) > box.half_size) return kInf;
      continue;
    }
    double ta = (-box.half_size - o[i]) / d[i];
    double tb = (box.half_size - o[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t_near = std::max(t_near, ta);
    t_far = std::min(t_far, tb);
    if (t_near > t_far) return kInf;
  }
  if (t_near > kMinHit) return t_near;
  if (t_far > kMinHit) return t_far;
  return kInf;
}

void Scene::add(const RectPatch& p) {
  rects_.push_back(p);
  rect_bounds_.push_back(bounds_of(p));
}

void Scene::add(const CylinderPatch& p) {
  cylinders_.push_back(p);
  cylinder_bounds_.push_back(bounds_of(p));
}

void Scene::add(const AnnulusPatch& p) {
  annuli_.push_back(p);
  annulus_bounds_.push_back(bounds_of(p));
}

void Scene::add(const FeatureBox& b) { boxes_.push_back(b); }

std::optional<double> Scene::cast(const Ray& ray, double max_range) const {
  double best = kInf;
  for (const auto& p : rects_) best = std::min(best, intersect(ray, p));
  for (const auto& p : cylinders_) best = std::min(best, intersect(ray, p));
  for (const auto& p : annuli_) best = std::min(best, intersect(ray, p));
  for (const auto& b : boxes_) best = std::min(best, intersect(ray, b));
  if (best <= max_range) return best;
  return std::nullopt;
}

Scene build_scene(const TunnelMap& map) {
  Scene scene;
  const double w = map.half_width();
  const double h = map.wall_height();
  const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  for (const PlacedSegment& seg : map.segments()) {
    if (seg.spec.type == SegmentType::kStraight) {
      const Eigen::Vector3d start(seg.start.x, seg.start.y, 0.0);
      const Eigen::Vector3d t(std::cos(seg.start.psi), std::sin(seg.start.psi), 0.0);
      const Eigen::Vector3d n(-t.y(), t.x(), 0.0);
      scene.add(RectPatch{start + w * n, t, up, seg.arc_length, h});
      scene.add(RectPatch{start - w * n, t, up, seg.arc_length, h});
      scene.add(RectPatch{start - w * n, t, n, seg.arc_length, 2.0 * w});
      scene.add(RectPatch{start - w * n + h * up, t, n, seg.arc_length, 2.0 * w});
    } else {
      const double sign = seg.spec.angle >= 0.0 ? 1.0 : -1.0;
      const Eigen::Vector2d left(-std::sin(seg.start.psi), std::cos(seg.start.psi));
      const Eigen::Vector2d center =
          Eigen::Vector2d(seg.start.x, seg.start.y) + sign * seg.spec.radius * left;
      const double phi0 = seg.start.psi - sign * kPi / 2.0;
      const double span = std::abs(seg.spec.angle);
      // Polar sector swept counter-clockwise.
      const double theta0 = sign > 0.0 ? phi0 : phi0 - span;
      const double r_in = seg.spec.radius - w;
      const double r_out = seg.spec.radius + w;
      scene.add(CylinderPatch{center, r_in, theta0, span, 0.0, h});
      scene.add(CylinderPatch{center, r_out, theta0, span, 0.0, h});
      scene.add(AnnulusPatch{center, 0.0, r_in, r_out, theta0, span});
      scene.add(AnnulusPatch{center, h, r_in, r_out, theta0, span});
    }
  }
  for (const FeatureBox& b : map.features()) scene.add(b);
  return scene;
}

void LidarModel::validate() const {
  if (horizontal_rays < 1 || vertical_rays < 1) {
    throw InvalidArgument("lidar: ray counts must be >= 1");
  }
  if (!(vertical_fov >= 0.0 && vertical_fov < kPi)) {
    throw InvalidArgument("lidar: vertical_fov must lie in [0, pi)");
  }
  if (!(max_range > 0.0)) throw InvalidArgument("lidar: max_range must be positive");
  if (!std::isfinite(mount_height)) throw InvalidArgument("lidar: mount_height must be finite");
}

std::vector<Eigen::Vector3d> ray_directions(const LidarModel& model) {
  model.validate();
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(model.horizontal_rays) *
              static_cast<std::size_t>(model.vertical_rays));
  for (int c = 0; c < model.horizontal_rays; ++c) {
    const double az = model.azimuth_offset + 2.0 * kPi * c / model.horizontal_rays;
    const double ca = std::cos(az);
    const double sa = std::sin(az);
    for (int r = 0; r < model.vertical_rays; ++r) {
      const double el = model.vertical_rays == 1
                            ? 0.0
                            : -0.5 * model.vertical_fov +
                                  model.vertical_fov * r / (model.vertical_rays - 1);
      const double ce = std::cos(el);
      out.emplace_back(ce * ca, ce * sa, std::sin(el));
    }
  }
  return out;
}

PointCloud render_scan(const Scene& scene, const Pose2& pose, const LidarModel& model,
                       double noise_sigma, std::mt19937_64& rng, Timestamp stamp) {
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("render_scan: noise_sigma must be >= 0");
  const std::vector<Eigen::Vector3d> dirs = ray_directions(model);
  const Eigen::Vector3d origin(pose.x, pose.y, model.mount_height);
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);

  // Only surfaces whose bounds come within range can produce a hit.
  Scene local;
  for (std::size_t i = 0; i < scene.rects().size(); ++i) {
    if (scene.rect_bounds()[i].distance(origin) <= model.max_range) local.add(scene.rects()[i]);
  }
  for (std::size_t i = 0; i < scene.cylinders().size(); ++i) {
    if (scene.cylinder_bounds()[i].distance(origin) <= model.max_range) {
      local.add(scene.cylinders()[i]);
    }
  }
  for (std::size_t i = 0; i < scene.annuli().size(); ++i) {
    if (scene.annulus_bounds()[i].distance(origin) <= model.max_range) {
      local.add(scene.annuli()[i]);
    }
  }

  // Boxes bucketed by the azimuth columns their footprint can intercept.
  const int columns = model.horizontal_rays;
  const double step = 2.0 * kPi / columns;
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(columns));
  const auto& boxes = scene.boxes();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const FeatureBox& b = boxes[i];
    const double dx = b.center.x() - origin.x();
    const double dy = b.center.y() - origin.y();
    const double reach = std::sqrt(3.0) * b.half_size;
    const double dist = std::hypot(dx, dy);
    if (dist - reach > model.max_range) continue;
    if (dist <= std::sqrt(2.0) * b.half_size + 1e-6) {
      for (auto& bucket : buckets) bucket.push_back(i);
      continue;
    }
    const double bearing = std::atan2(dy, dx);
    // Relative to column 0.
    const double center_az = bearing - pose.psi - model.azimuth_offset;
    double lo = 0.0;
    double hi = 0.0;
    const double cb = std::cos(b.yaw);
    const double sb = std::sin(b.yaw);
    for (double u : {-b.half_size, b.half_size}) {
      for (double v : {-b.half_size, b.half_size}) {
        const double cx = dx + cb * u - sb * v;
        const double cy = dy + sb * u + cb * v;
        const double d = std::remainder(std::atan2(cy, cx) - bearing, 2.0 * kPi);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
    const auto first = static_cast<long>(std::ceil((center_az + lo) / step - 1e-6));
    const auto last = static_cast<long>(std::floor((center_az + hi) / step + 1e-6));
    for (long k = first; k <= last; ++k) {
      const long col = ((k % columns) + columns) % columns;
      buckets[static_cast<std::size_t>(col)].push_back(i);
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  PointCloud cloud;
  cloud.stamp = stamp;
  cloud.points.reserve(dirs.size());
  for (std::size_t idx = 0; idx < dirs.size(); ++idx) {
    const auto col = idx / static_cast<std::size_t>(model.vertical_rays);
    const Eigen::Vector3d& ds = dirs[idx];
    Ray ray;
    ray.origin = origin;
    ray.direction = {c * ds.x() - s * ds.y(), s * ds.x() + c * ds.y(), ds.z()};
    double best = local.cast(ray, kInf).value_or(kInf);
    for (std::size_t bi : buckets[col]) best = std::min(best, intersect(ray, boxes[bi]));
    if (!(best <= model.max_range)) continue;
    const double range = noise_sigma > 0.0 ? best + noise_sigma * noise(rng) : best;
    cloud.points.push_back(range * ds);
  }
  return cloud;
}

PointCloud render_scan(const TunnelMap& map, const Scene& scene, const GroundTruthSample& sample,
                       const LidarModel& model, double noise_sigma, std::mt19937_64& rng) {
  const StateVector& x = sample.state;
  if (!map.locate(x.x(), x.y()) || !(model.mount_height > 0.0) ||
      !(model.mount_height < map.wall_height())) {
    std::ostringstream msg;
    msg << "render_scan: sensor at (" << x.x() << ", " << x.y() << ", " << model.mount_height
        << ") is outside the tunnel";
    throw InvalidPose(msg.str());
  }
  return render_scan(scene, Pose2{x.x(), x.y(), x.psi()}, model, noise_sigma, rng, sample.stamp);
}

PointCloud render_scan(const TunnelMap& map, const GroundTruthSample& sample,
                       const LidarModel& model, double noise_sigma, std::mt19937_64& rng) {
  return render_scan(map, build_scene(map), sample, model, noise_sigma, rng);
}

}  // namespace tunnelfuse
