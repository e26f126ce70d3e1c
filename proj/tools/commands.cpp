#include "commands.hpp"

#include "tunnelfuse/csv_io.hpp"
#include "tunnelfuse/ekf.hpp"
#include "tunnelfuse/errors.hpp"
#include "tunnelfuse/evaluation.hpp"
#include "tunnelfuse/ply_io.hpp"
#include "tunnelfuse/scenario.hpp"
#include "tunnelfuse/scenario_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace tunnelfuse::cli {

namespace {

namespace fs = std::filesystem;

// Distinguishes the three failure classes the exit codes report.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ScenarioConfig load_config(const RunOptions& o) {
  ScenarioConfig c;
  try {
    c = load_scenario_config(o.config);
  } catch (const IoError& e) {
    throw ConfigError("", e.what());
  }
  if (o.seed) c.seed = *o.seed;
  if (o.rays) {
    c.lidar.model.horizontal_rays = o.rays->first;
    c.lidar.model.vertical_rays = o.rays->second;
  }
  return c;
}

fs::path out_dir_for(const RunOptions& o, const std::string& name) {
  fs::path dir = o.out.empty() ? fs::path("reports") / name : o.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path.string(), "cannot open for writing");
  f << text;
  if (!f) throw IoError(path.string(), "write failed");
}

struct Simulation {
  ScenarioResult result;
  fs::path dir;
};

Simulation simulate(const ScenarioConfig& c, const RunOptions& o, std::ostream& err) {
  Simulation sim;
  sim.dir = out_dir_for(o, c.name);
  const fs::path scans = sim.dir / "scans";
  if (o.scan_archive) {
    std::error_code ec;
    fs::create_directories(scans, ec);
    if (ec) throw IoError(scans.string(), "cannot create directory: " + ec.message());
  }
  ScenarioHooks hooks;
  if (o.scan_archive) {
    hooks.scan_sink = [&](std::size_t k, const PointCloud& cloud) {
      char name[32];
      std::snprintf(name, sizeof(name), "scan_%06zu.ply", k);
      write_ply(scans / name, cloud);
    };
  }
  hooks.progress = [&](std::size_t done, std::size_t total) {
    if (done == total || done % 500 == 0) {
      err << "[simulate] " << c.name << ": lidar frame " << done << "/" << total << "\n";
    }
  };
  sim.result = run_scenario(c, hooks);
  write_truth_csv(sim.dir / "truth.csv", sim.result.truth);
  write_events_csv(sim.dir / "events.csv", sim.result.events);
  write_file(sim.dir / "config.json", scenario_config_to_json(c));
  std::size_t degenerate = 0;
  std::size_t failed = 0;
  for (const auto& f : sim.result.lidar_frames) {
    degenerate += f.degenerate ? 1 : 0;
    failed += f.failed ? 1 : 0;
  }
  err << "[simulate] " << c.name << ": " << sim.result.events.size() << " events, "
      << sim.result.lidar_frames.size() << " registrations (" << degenerate << " degenerate, "
      << failed << " failed), " << sim.result.thermal_dropouts << " thermal dropouts\n";
  return sim;
}

FilterRun fuse(const ScenarioConfig& c, const std::vector<PseudoMeasurement>& events,
               const std::vector<GroundTruthSample>& truth, std::ostream& err) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (event_before(events[i], events[i - 1])) {
      throw DataError("events are not sorted by time at row " + std::to_string(i + 1));
    }
  }
  if (truth.empty()) throw DataError("no ground truth to initialize from");
  const auto [x0, p0] = initial_filter_state(c, truth.front().state);
  FilterRun run;
  try {
    run = run_filter(events, x0, p0, filter_options(c));
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  for (const auto& s : run.skipped) {
    err << "[fuse] skipped " << to_string(s.source) << " update at t=" << s.stamp.seconds
        << " (innovation condition " << s.condition << ")\n";
  }
  err << "[fuse] " << run.correction_count() << " corrections, " << run.log.size()
      << " log records\n";
  return run;
}

ErrorReport report(const TrajectoryLog& log, const std::vector<GroundTruthSample>& truth,
                   const fs::path& dir, const std::string& name, std::ostream& out) {
  ErrorReport rep;
  try {
    rep = compute_errors(log, truth);
  } catch (const InvalidArgument& e) {
    throw EvaluationError(e.what());
  }
  write_report_json(rep, name, dir / "report.json");
  render_plots(rep, log, truth, dir);
  out << name << " rmse=" << format_number(rep.position_rmse, 6)
      << " max=" << format_number(rep.max_position_error, 6) << "\n";
  return rep;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    body();
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const EvaluationError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return kEvaluationError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const IoError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    // Invalid maps, trajectories running off an open map and similar are
    // problems with the scenario definition.
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace

std::optional<std::pair<int, int>> parse_rays(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) return std::nullopt;
  int h = 0;
  int v = 0;
  const char* b = text.data();
  const char* e = text.data() + text.size();
  const auto r1 = std::from_chars(b, b + x, h);
  const auto r2 = std::from_chars(b + x + 1, e, v);
  if (r1.ec != std::errc() || r1.ptr != b + x || r2.ec != std::errc() || r2.ptr != e) {
    return std::nullopt;
  }
  if (h < 1 || v < 1) return std::nullopt;
  return std::make_pair(h, v);
}

int cmd_simulate(const RunOptions& options, std::ostream& /*out*/, std::ostream& err) {
  return guarded(err, [&] { simulate(load_config(options), options, err); });
}

int cmd_fuse(const fs::path& events_path, const RunOptions& options, std::ostream& /*out*/,
             std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(options);
    const fs::path dir = out_dir_for(options, c.name);
    const auto events = read_events_csv(events_path);
    const auto truth = scenario_truth(c);
    const FilterRun run = fuse(c, events, truth, err);
    export_csv(run.log, truth, dir / "log.csv");
  });
}

int cmd_report(const fs::path& log_path, const fs::path& truth_path, const fs::path& out_dir,
               const std::string& name, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunOptions o;
    o.out = out_dir;
    const fs::path dir = out_dir_for(o, name);
    const TrajectoryLog log = read_log_csv(log_path);
    const auto truth = read_truth_csv(truth_path);
    report(log, truth, dir, name, out);
  });
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(options);
    const Simulation sim = simulate(c, options, err);
    const FilterRun run = fuse(c, sim.result.events, sim.result.truth, err);
    export_csv(run.log, sim.result.truth, sim.dir / "log.csv");
    report(run.log, sim.result.truth, sim.dir, c.name, out);
  });
}

}  // namespace tunnelfuse::cli
