#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = tunnelfuse::cli;

int main(int argc, char** argv) {
  CLI::App app{"Thermal/LiDAR EKF fusion in a simulated tunnel"};
  app.require_subcommand(1);

  cli::RunOptions opts;
  std::string rays;
  bool no_scan_archive = false;
  std::uint64_t seed = 0;

  const auto add_scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Scenario JSON")->required();
    sub->add_option("--out", opts.out, "Output directory (default reports/<name>)");
    sub->add_option("--seed", seed, "Override the config seed");
  };
  const auto add_sim_flags = [&](CLI::App* sub) {
    sub->add_flag("--no-scan-archive", no_scan_archive, "Do not write PLY scans");
    sub->add_option("--rays", rays, "LiDAR grid override, e.g. 256x16");
  };

  auto* simulate = app.add_subcommand("simulate", "Render scans and produce the event stream");
  add_scenario_flags(simulate);
  add_sim_flags(simulate);

  std::string events;
  auto* fuse = app.add_subcommand("fuse", "Run the filter over an event stream");
  fuse->add_option("--events", events, "events.csv from simulate")->required();
  add_scenario_flags(fuse);

  std::string log;
  std::string truth;
  std::string name = "scenario";
  std::string report_out;
  auto* report = app.add_subcommand("report", "Error report and plots for a filter log");
  report->add_option("--log", log, "log.csv from fuse")->required();
  report->add_option("--truth", truth, "truth.csv from simulate")->required();
  report->add_option("--name", name, "Scenario name used in the report");
  report->add_option("--out", report_out, "Output directory (default reports/<name>)");

  auto* run = app.add_subcommand("run", "simulate + fuse + report");
  add_scenario_flags(run);
  add_sim_flags(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kConfigError;
  }

  if (auto* sub = app.get_subcommands().front(); sub->count("--seed") > 0) opts.seed = seed;
  opts.scan_archive = !no_scan_archive;
  if (!rays.empty()) {
    opts.rays = cli::parse_rays(rays);
    if (!opts.rays) {
      std::cerr << "config error: --rays expects HxV with positive integers, got '" << rays
                << "'\n";
      return cli::kConfigError;
    }
  }

  if (simulate->parsed()) return cli::cmd_simulate(opts, std::cout, std::cerr);
  if (fuse->parsed()) return cli::cmd_fuse(events, opts, std::cout, std::cerr);
  if (report->parsed()) {
    return cli::cmd_report(log, truth, report_out, name, std::cout, std::cerr);
  }
  return cli::cmd_run(opts, std::cout, std::cerr);
}
