#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

namespace tunnelfuse::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kEvaluationError = 4,
};

struct RunOptions {
  std::filesystem::path config;
  /// Empty means reports/<scenario name>.
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  bool scan_archive = true;
  /// (horizontal, vertical) ray counts overriding the config.
  std::optional<std::pair<int, int>> rays;
};

/// Parses "HxV" such as "256x16". Empty on malformed input.
std::optional<std::pair<int, int>> parse_rays(const std::string& text);

/// Writes truth.csv, events.csv, config.json and, unless disabled,
/// scans/scan_<frame>.ply into the output directory.
int cmd_simulate(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Filters an event file and writes log.csv. Truth for the log's comparison
/// columns is regenerated from the config.
int cmd_fuse(const std::filesystem::path& events, const RunOptions& options, std::ostream& out,
             std::ostream& err);

/// report.json plus trajectory.svg, heading.svg and pos_error.svg.
int cmd_report(const std::filesystem::path& log, const std::filesystem::path& truth,
               const std::filesystem::path& out_dir, const std::string& name, std::ostream& out,
               std::ostream& err);

/// simulate, fuse and report in one go, all into one directory.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace tunnelfuse::cli
