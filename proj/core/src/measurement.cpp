#include "tunnelfuse/measurement.hpp"
#include "tunnelfuse/trajectory_log.hpp"

namespace tunnelfuse {

std::string_view to_string(Sensor s) {
  return s == Sensor::kLidar ? "LiDAR" : "Thermal";
}

std::optional<Sensor> sensor_from_string(std::string_view s) {
  if (s == "LiDAR" || s == "lidar") return Sensor::kLidar;
  if (s == "Thermal" || s == "thermal") return Sensor::kThermal;
  return std::nullopt;
}

std::string_view to_string(UpdateSource s) {
  switch (s) {
    case UpdateSource::kInitial:
      return "init";
    case UpdateSource::kPrediction:
      return "predict";
    case UpdateSource::kLidar:
      return "LiDAR";
    case UpdateSource::kThermal:
      return "Thermal";
  }
  return "predict";
}

std::optional<UpdateSource> update_source_from_string(std::string_view s) {
  if (s == "init") return UpdateSource::kInitial;
  if (s == "predict") return UpdateSource::kPrediction;
  if (s == "LiDAR") return UpdateSource::kLidar;
  if (s == "Thermal") return UpdateSource::kThermal;
  return std::nullopt;
}

}  // namespace tunnelfuse
