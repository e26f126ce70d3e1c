#include "tunnelfuse/scenario_config.hpp"

#include "tunnelfuse/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tunnelfuse {

namespace {

using nlohmann::json;

// Field reader for one JSON object that remembers which keys were consumed so
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_ + "/" + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) throw ConfigError(field(key), "required field is missing");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v == nullptr ? fallback : as_number(*v, field(key));
  }

  double required_number(const std::string& key) { return as_number(require(key), field(key)); }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(field(key), "must be > 0");
    return v;
  }

  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 0.0)) throw ConfigError(field(key), "must be >= 0");
    return v;
  }

  int positive_int(const std::string& key, int fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    const auto i = v->get<std::int64_t>();
    if (i < 1 || i > 1'000'000) throw ConfigError(field(key), "must be in [1, 1000000]");
    return static_cast<int>(i);
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (used_.count(key) == 0) throw ConfigError(field(key), "unknown key '" + key + "'");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
    return d;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  return v;
}

MapConfig parse_map(const json& j) {
  ObjectReader r(j, "/map");
  MapConfig m;
  const json& segs = require_array(r.require("segments"), r.field("segments"));
  if (segs.empty()) throw ConfigError(r.field("segments"), "needs at least one segment");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    ObjectReader s(segs[i], "/map/segments/" + std::to_string(i));
    const std::string type = s.string("type", "");
    if (type == "straight") {
      const double length = s.required_number("length");
      if (!(length > 0.0)) throw ConfigError(s.field("length"), "must be > 0");
      m.segments.push_back(SegmentSpec::straight(length));
    } else if (type == "arc") {
      const double radius = s.required_number("radius");
      const double angle = s.required_number("angle_deg");
      if (!(radius > 0.0)) throw ConfigError(s.field("radius"), "must be > 0");
      if (angle == 0.0 || std::abs(angle) > 360.0) {
        throw ConfigError(s.field("angle_deg"), "must be non-zero and within [-360, 360]");
      }
      m.segments.push_back(SegmentSpec::arc(radius, deg_to_rad(angle)));
    } else {
      throw ConfigError(s.field("type"), "expected \"straight\" or \"arc\"");
    }
    s.finish();
  }
  m.half_width = r.positive("half_width", m.half_width);
  m.wall_height = r.positive("wall_height", m.wall_height);
  m.feature_density = r.non_negative("feature_density", m.feature_density);
  m.closed_loop = r.boolean("closed_loop", m.closed_loop);
  r.finish();
  return m;
}

TrajectoryConfig parse_trajectory(const json& j) {
  ObjectReader r(j, "/trajectory");
  TrajectoryConfig t;
  t.duration_s = r.positive("duration_s", t.duration_s);
  t.sample_rate_hz = r.positive("sample_rate_hz", t.sample_rate_hz);
  t.accel_limit = r.positive("accel_limit", t.accel_limit);
  if (const json* p = r.find("speed_profile")) {
    const json& arr = require_array(*p, r.field("speed_profile"));
    if (arr.empty()) throw ConfigError(r.field("speed_profile"), "needs at least one entry");
    t.speed_profile.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ObjectReader e(arr[i], "/trajectory/speed_profile/" + std::to_string(i));
      SpeedTarget st;
      st.t = e.required_number("t");
      st.speed = e.required_number("speed");
      if (!(st.speed >= 0.0)) throw ConfigError(e.field("speed"), "must be >= 0");
      if (i == 0 && st.t != 0.0) throw ConfigError(e.field("t"), "first entry must be at t = 0");
      if (i > 0 && !(st.t > t.speed_profile.back().t)) {
        throw ConfigError(e.field("t"), "times must increase strictly");
      }
      e.finish();
      t.speed_profile.push_back(st);
    }
  }
  r.finish();
  return t;
}

LidarConfig parse_lidar(const json& j) {
  ObjectReader r(j, "/sensors/lidar");
  LidarConfig l;
  l.rate_hz = r.positive("rate_hz", l.rate_hz);
  l.model.horizontal_rays = r.positive_int("horizontal_rays", l.model.horizontal_rays);
  l.model.vertical_rays = r.positive_int("vertical_rays", l.model.vertical_rays);
  const double fov = r.non_negative("vertical_fov_deg", rad_to_deg(l.model.vertical_fov));
  if (!(fov < 180.0)) throw ConfigError(r.field("vertical_fov_deg"), "must be < 180");
  l.model.vertical_fov = deg_to_rad(fov);
  l.model.max_range = r.positive("max_range", l.model.max_range);
  l.model.mount_height = r.positive("mount_height", l.model.mount_height);
  l.range_noise_sigma = r.non_negative("range_noise_sigma", l.range_noise_sigma);
  l.random_azimuth_phase = r.boolean("random_azimuth_phase", l.random_azimuth_phase);
  l.registration.voxel_size = r.positive("voxel_size", l.registration.voxel_size);
  l.registration.normal_neighbors = static_cast<std::size_t>(
      r.positive_int("normal_k", static_cast<int>(l.registration.normal_neighbors)));
  if (l.registration.normal_neighbors < 4) throw ConfigError(r.field("normal_k"), "must be >= 4");
  l.registration.degeneracy_ratio =
      r.non_negative("degeneracy_ratio", l.registration.degeneracy_ratio);
  l.registration.linear_point_terms =
      r.boolean("linear_point_terms", l.registration.linear_point_terms);
  const double v_sigma = r.positive("v_noise_sigma", std::sqrt(l.base_noise(0, 0)));
  const double w_sigma = r.positive("psi_dot_noise_sigma", std::sqrt(l.base_noise(1, 1)));
  l.base_noise = Eigen::Vector2d(v_sigma * v_sigma, w_sigma * w_sigma).asDiagonal();
  l.cost_scale = r.positive("cost_scale", l.cost_scale);
  r.finish();
  return l;
}

ThermalConfig parse_thermal(const json& j) {
  ObjectReader r(j, "/sensors/thermal");
  ThermalConfig t;
  ThermalOdomParams& p = t.params;
  p.frame_rate = r.positive("frame_rate_hz", p.frame_rate);
  p.keyframe_interval = r.positive_int("keyframe_interval", p.keyframe_interval);
  p.scale_bias_walk_sigma = r.non_negative("scale_bias_walk_sigma", p.scale_bias_walk_sigma);
  p.initial_scale_bias = r.positive("initial_scale_bias", p.initial_scale_bias);
  p.v_noise_sigma = r.non_negative("v_noise_sigma", p.v_noise_sigma);
  p.psi_dot_noise_sigma = r.non_negative("psi_dot_noise_sigma", p.psi_dot_noise_sigma);
  p.dropout_probability_per_frame =
      r.non_negative("dropout_probability", p.dropout_probability_per_frame);
  if (p.dropout_probability_per_frame > 1.0) {
    throw ConfigError(r.field("dropout_probability"), "must lie in [0, 1]");
  }
  t.degradation_level = r.non_negative("degradation_level", t.degradation_level);
  if (t.degradation_level > 1.0) {
    throw ConfigError(r.field("degradation_level"), "must lie in [0, 1]");
  }
  const double v_sigma = r.positive("filter_v_sigma", std::sqrt(p.measurement_noise(0, 0)));
  const double w_sigma =
      r.positive("filter_psi_dot_sigma", std::sqrt(p.measurement_noise(1, 1)));
  p.measurement_noise = Eigen::Vector2d(v_sigma * v_sigma, w_sigma * w_sigma).asDiagonal();
  r.finish();
  return t;
}

std::vector<OutageWindow> parse_outages(const json& j) {
  const json& arr = require_array(j, "/outages");
  std::vector<OutageWindow> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    ObjectReader r(arr[i], "/outages/" + std::to_string(i));
    OutageWindow w;
    const std::string sensor = r.string("sensor", "");
    const auto parsed = sensor_from_string(sensor);
    if (!parsed) throw ConfigError(r.field("sensor"), "expected \"lidar\" or \"thermal\"");
    w.sensor = *parsed;
    w.start_s = r.required_number("start_s");
    w.end_s = r.required_number("end_s");
    if (!(w.start_s < w.end_s)) throw ConfigError(r.field("end_s"), "must be after start_s");
    r.finish();
    for (const auto& prev : out) {
      if (prev.sensor == w.sensor && prev.start_s <= w.end_s && w.start_s <= prev.end_s) {
        throw ConfigError(r.field("start_s"), "overlaps an earlier window of the same sensor");
      }
    }
    out.push_back(w);
  }
  return out;
}

FilterConfig parse_filter(const json& j) {
  ObjectReader r(j, "/filter");
  FilterConfig f;
  f.process.jerk_spectral_density = r.positive("jerk_density", f.process.jerk_spectral_density);
  f.process.yaw_jerk_spectral_density =
      r.positive("yaw_jerk_density", f.process.yaw_jerk_spectral_density);
  f.ts_max = r.positive("ts_max", f.ts_max);
  if (const json* d = r.find("initial_cov_diag")) {
    const std::string path = r.field("initial_cov_diag");
    const json& arr = require_array(*d, path);
    if (arr.size() != static_cast<std::size_t>(kStateDim)) {
      throw ConfigError(path, "expected 7 values (x, y, v, v_dot, psi, psi_dot, psi_ddot)");
    }
    for (int i = 0; i < kStateDim; ++i) {
      const std::string item = path + "/" + std::to_string(i);
      const double v = ObjectReader::as_number(arr[static_cast<std::size_t>(i)], item);
      if (!(v > 0.0)) throw ConfigError(item, "must be > 0");
      f.initial_cov_diag[i] = v;
    }
  }
  r.finish();
  return f;
}

ScenarioConfig parse_document(const json& doc) {
  ObjectReader r(doc, "");
  ScenarioConfig c;
  c.name = r.string("name", c.name);
  if (c.name.empty()) throw ConfigError("/name", "must not be empty");
  const json& seed = r.require("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ConfigError("/seed", "expected an unsigned 64-bit integer");
  }
  c.seed = seed.get<std::uint64_t>();
  c.map = parse_map(r.require("map"));
  c.trajectory = parse_trajectory(r.require("trajectory"));
  if (const json* s = r.find("sensors")) {
    ObjectReader sr(*s, "/sensors");
    if (const json* l = sr.find("lidar")) c.lidar = parse_lidar(*l);
    if (const json* t = sr.find("thermal")) c.thermal = parse_thermal(*t);
    sr.finish();
  }
  if (const json* o = r.find("outages")) c.outages = parse_outages(*o);
  if (const json* f = r.find("filter")) c.filter = parse_filter(*f);
  r.finish();
  return c;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what());
  }
  return parse_document(doc);
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return parse_scenario_config(buf.str());
}

std::string scenario_config_to_json(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["seed"] = c.seed;

  json segs = json::array();
  for (const auto& s : c.map.segments) {
    if (s.type == SegmentType::kStraight) {
      segs.push_back({{"type", "straight"}, {"length", s.length}});
    } else {
      segs.push_back({{"type", "arc"}, {"radius", s.radius}, {"angle_deg", rad_to_deg(s.angle)}});
    }
  }
  doc["map"] = {{"segments", segs},
                {"half_width", c.map.half_width},
                {"wall_height", c.map.wall_height},
                {"feature_density", c.map.feature_density},
                {"closed_loop", c.map.closed_loop}};

  json profile = json::array();
  for (const auto& p : c.trajectory.speed_profile) profile.push_back({{"t", p.t}, {"speed", p.speed}});
  doc["trajectory"] = {{"duration_s", c.trajectory.duration_s},
                       {"sample_rate_hz", c.trajectory.sample_rate_hz},
                       {"accel_limit", c.trajectory.accel_limit},
                       {"speed_profile", profile}};

  const LidarConfig& l = c.lidar;
  const ThermalOdomParams& t = c.thermal.params;
  doc["sensors"] = {
      {"lidar",
       {{"rate_hz", l.rate_hz},
        {"horizontal_rays", l.model.horizontal_rays},
        {"vertical_rays", l.model.vertical_rays},
        {"vertical_fov_deg", rad_to_deg(l.model.vertical_fov)},
        {"max_range", l.model.max_range},
        {"mount_height", l.model.mount_height},
        {"range_noise_sigma", l.range_noise_sigma},
        {"random_azimuth_phase", l.random_azimuth_phase},
        {"voxel_size", l.registration.voxel_size},
        {"normal_k", l.registration.normal_neighbors},
        {"degeneracy_ratio", l.registration.degeneracy_ratio},
        {"linear_point_terms", l.registration.linear_point_terms},
        {"v_noise_sigma", std::sqrt(l.base_noise(0, 0))},
        {"psi_dot_noise_sigma", std::sqrt(l.base_noise(1, 1))},
        {"cost_scale", l.cost_scale}}},
      {"thermal",
       {{"frame_rate_hz", t.frame_rate},
        {"keyframe_interval", t.keyframe_interval},
        {"scale_bias_walk_sigma", t.scale_bias_walk_sigma},
        {"initial_scale_bias", t.initial_scale_bias},
        {"v_noise_sigma", t.v_noise_sigma},
        {"psi_dot_noise_sigma", t.psi_dot_noise_sigma},
        {"dropout_probability", t.dropout_probability_per_frame},
        {"degradation_level", c.thermal.degradation_level},
        {"filter_v_sigma", std::sqrt(t.measurement_noise(0, 0))},
        {"filter_psi_dot_sigma", std::sqrt(t.measurement_noise(1, 1))}}}};

  json outages = json::array();
  for (const auto& w : c.outages) {
    outages.push_back({{"sensor", w.sensor == Sensor::kLidar ? "lidar" : "thermal"},
                       {"start_s", w.start_s},
                       {"end_s", w.end_s}});
  }
  doc["outages"] = outages;

  json diag = json::array();
  for (int i = 0; i < kStateDim; ++i) diag.push_back(c.filter.initial_cov_diag[i]);
  doc["filter"] = {{"jerk_density", c.filter.process.jerk_spectral_density},
                   {"yaw_jerk_density", c.filter.process.yaw_jerk_spectral_density},
                   {"initial_cov_diag", diag},
                   {"ts_max", c.filter.ts_max}};
  return doc.dump(2) + "\n";
}

}  // namespace tunnelfuse
