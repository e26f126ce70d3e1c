#include "tunnelfuse/csv_io.hpp"

#include "tunnelfuse/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace tunnelfuse {

namespace {

class LineReader {
 public:
  LineReader(const std::filesystem::path& path, const char* header) : path_(path), in_(path) {
    if (!in_) throw IoError(path_.string(), "cannot open for reading");
    std::string line;
    if (!next(line)) throw IoError(path_.string(), "empty file, expected header");
    if (line != header) {
      throw IoError(path_.string(), "unexpected header '" + line + "', expected '" + header + "'");
    }
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError(path_.string(), "line " + std::to_string(line_no_) + ": " + what);
  }

  std::vector<std::string> fields(const std::string& line, std::size_t expected) const {
    auto f = split_csv_line(line);
    if (f.size() != expected) {
      fail("expected " + std::to_string(expected) + " fields, got " + std::to_string(f.size()));
    }
    return f;
  }

  double number(const std::string& text) const {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) fail("not a number: '" + text + "'");
    if (!std::isfinite(v)) fail("non-finite value '" + text + "'");
    return v;
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

std::string format_number(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_events_csv(const std::filesystem::path& path,
                      std::span<const PseudoMeasurement> events) {
  auto out = open_out(path);
  out << kEventsHeader << '\n';
  for (const auto& e : events) {
    out << format_number(e.stamp.seconds, 17) << ',' << to_string(e.source) << ','
        << format_number(e.v_meas, 17) << ',' << format_number(e.psi_dot_meas, 17) << ','
        << format_number(e.noise(0, 0), 17) << ',' << format_number(e.noise(0, 1), 17) << ','
        << format_number(e.noise(1, 1), 17) << '\n';
  }
  check_written(out, path);
}

std::vector<PseudoMeasurement> read_events_csv(const std::filesystem::path& path) {
  LineReader reader(path, kEventsHeader);
  std::vector<PseudoMeasurement> out;
  std::string line;
  while (reader.next(line)) {
    const auto f = reader.fields(line, 7);
    PseudoMeasurement m;
    m.stamp = Timestamp{reader.number(f[0])};
    const auto source = sensor_from_string(f[1]);
    if (!source) reader.fail("unknown source '" + f[1] + "'");
    m.source = *source;
    m.v_meas = reader.number(f[2]);
    m.psi_dot_meas = reader.number(f[3]);
    m.noise << reader.number(f[4]), reader.number(f[5]), reader.number(f[5]),
        reader.number(f[6]);
    out.push_back(m);
  }
  return out;
}

void write_truth_csv(const std::filesystem::path& path,
                     std::span<const GroundTruthSample> truth) {
  auto out = open_out(path);
  out << kTruthHeader << '\n';
  for (const auto& s : truth) {
    out << format_number(s.stamp.seconds, 17);
    for (int i = 0; i < kStateDim; ++i) out << ',' << format_number(s.state[i], 17);
    out << '\n';
  }
  check_written(out, path);
}

std::vector<GroundTruthSample> read_truth_csv(const std::filesystem::path& path) {
  LineReader reader(path, kTruthHeader);
  std::vector<GroundTruthSample> out;
  std::string line;
  while (reader.next(line)) {
    const auto f = reader.fields(line, 1 + kStateDim);
    StateVec x;
    for (int i = 0; i < kStateDim; ++i) x[i] = reader.number(f[static_cast<std::size_t>(i) + 1]);
    out.push_back({Timestamp{reader.number(f[0])}, StateVector(x)});
  }
  return out;
}

TrajectoryLog read_log_csv(const std::filesystem::path& path) {
  LineReader reader(path, kLogHeader);
  TrajectoryLog log;
  std::string line;
  while (reader.next(line)) {
    const auto f = reader.fields(line, 15);
    TrajectoryRecord r;
    r.stamp = Timestamp{reader.number(f[0])};
    r.state = StateVector(reader.number(f[4]), reader.number(f[5]), reader.number(f[7]), 0.0,
                          reader.number(f[6]), reader.number(f[8]), 0.0);
    r.cov_diagonal[kX] = reader.number(f[12]);
    r.cov_diagonal[kY] = reader.number(f[13]);
    const auto source = update_source_from_string(f[14]);
    if (!source) reader.fail("unknown source '" + f[14] + "'");
    r.source = *source;
    if (!log.records.empty() && !(r.stamp > log.records.back().stamp)) {
      reader.fail("timestamps must increase strictly");
    }
    log.records.push_back(r);
  }
  return log;
}

}  // namespace tunnelfuse
