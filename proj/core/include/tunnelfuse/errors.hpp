#pragma once

#include <stdexcept>
#include <string>

namespace tunnelfuse {

// Every failure raised by the library derives from one of the std exception
// categories so callers can catch broadly or by the specific type below.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateOrientation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InsufficientPoints : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RegistrationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMap : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPose : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Schema or value problem in a scenario configuration document. `field` is a
/// JSON-pointer style path such as "/sensors/lidar/rate_hz".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace tunnelfuse
