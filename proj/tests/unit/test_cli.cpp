#include "commands.hpp"

#include "tunnelfuse/csv_io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace tunnelfuse {
namespace {

namespace fs = std::filesystem;

fs::path fixture() { return fs::path(TUNNELFUSE_TEST_DATA_DIR) / "short_run.json"; }

cli::RunOptions options(const fs::path& out) {
  cli::RunOptions o;
  o.config = fixture();
  o.out = out;
  o.scan_archive = false;
  return o;
}

TEST(ParseRays, Examples) {
  EXPECT_EQ(cli::parse_rays("256x16"), std::make_pair(256, 16));
  EXPECT_FALSE(cli::parse_rays("256").has_value());
  EXPECT_FALSE(cli::parse_rays("256x").has_value());
  EXPECT_FALSE(cli::parse_rays("0x16").has_value());
  EXPECT_FALSE(cli::parse_rays("256x16x2").has_value());
  EXPECT_FALSE(cli::parse_rays("-4x16").has_value());
}

TEST(Cli, RunWritesArtifactsAndIsDeterministic) {
  const fs::path a = testing::temp_dir("run_a");
  const fs::path b = testing::temp_dir("run_b");
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_run(options(a), out, err), cli::kOk) << err.str();
  EXPECT_NE(out.str().find("short_loop rmse="), std::string::npos);
  for (const char* f : {"truth.csv", "events.csv", "config.json", "log.csv", "report.json",
                        "trajectory.svg", "heading.svg", "pos_error.svg"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "scans"));
  ASSERT_EQ(cli::cmd_run(options(b), out, err), cli::kOk) << err.str();
  for (const char* f : {"events.csv", "log.csv", "report.json", "truth.csv"}) {
    EXPECT_EQ(testing::read_file(a / f), testing::read_file(b / f)) << f;
  }
}

TEST(Cli, SeedOverrideChangesEvents) {
  const fs::path a = testing::temp_dir("seed_a");
  const fs::path b = testing::temp_dir("seed_b");
  std::ostringstream sink;
  cli::RunOptions oa = options(a);
  cli::RunOptions ob = options(b);
  ob.seed = 12;
  ASSERT_EQ(cli::cmd_simulate(oa, sink, sink), cli::kOk);
  ASSERT_EQ(cli::cmd_simulate(ob, sink, sink), cli::kOk);
  EXPECT_NE(testing::read_file(a / "events.csv"), testing::read_file(b / "events.csv"));
}

TEST(Cli, StagedPipelineMatchesRun) {
  const fs::path run = testing::temp_dir("staged_run");
  const fs::path staged = testing::temp_dir("staged");
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_run(options(run), out, err), cli::kOk) << err.str();
  ASSERT_EQ(cli::cmd_simulate(options(staged), out, err), cli::kOk) << err.str();
  ASSERT_EQ(cli::cmd_fuse(staged / "events.csv", options(staged), out, err), cli::kOk) << err.str();
  EXPECT_EQ(testing::read_file(run / "log.csv"), testing::read_file(staged / "log.csv"));
  ASSERT_EQ(cli::cmd_report(staged / "log.csv", staged / "truth.csv", staged / "report",
                            "short_loop", out, err),
            cli::kOk)
      << err.str();
  EXPECT_TRUE(fs::exists(staged / "report" / "report.json"));
  EXPECT_TRUE(fs::exists(staged / "report" / "pos_error.svg"));
}

TEST(Cli, ScanArchive) {
  const fs::path dir = testing::temp_dir("scans");
  cli::RunOptions o = options(dir);
  o.scan_archive = true;
  o.rays = std::make_pair(32, 4);
  std::ostringstream sink;
  ASSERT_EQ(cli::cmd_simulate(o, sink, sink), cli::kOk);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir / "scans")) {
    EXPECT_EQ(e.path().extension(), ".ply");
    ++n;
  }
  EXPECT_EQ(n, 200u);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path dir = testing::temp_dir("cfg");
  std::ostringstream out;
  std::ostringstream err;
  cli::RunOptions o = options(dir);
  o.config = dir / "missing.json";
  EXPECT_EQ(cli::cmd_run(o, out, err), cli::kConfigError);

  std::string text = testing::read_file(fixture());
  text.insert(text.find("\"seed\""), "\"sead\": 1, ");
  testing::write_file(dir / "bad.json", text);
  o.config = dir / "bad.json";
  err.str("");
  EXPECT_EQ(cli::cmd_simulate(o, out, err), cli::kConfigError);
  EXPECT_NE(err.str().find("sead"), std::string::npos) << err.str();

  // The trajectory runs off the end of the open map.
  text = testing::read_file(fixture());
  text.replace(text.find("\"duration_s\": 20"), 16, "\"duration_s\": 200");
  testing::write_file(dir / "long.json", text);
  o.config = dir / "long.json";
  EXPECT_EQ(cli::cmd_simulate(o, out, err), cli::kConfigError);
}

TEST(Cli, DataErrorsExitThree) {
  const fs::path dir = testing::temp_dir("data");
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cli::cmd_fuse(dir / "missing.csv", options(dir), out, err), cli::kDataError);

  const std::string h = std::string(kEventsHeader) + "\n";
  testing::write_file(dir / "unsorted.csv",
                      h + "1.0,LiDAR,3,0,0.01,0,0.001\n0.5,LiDAR,3,0,0.01,0,0.001\n");
  err.str("");
  EXPECT_EQ(cli::cmd_fuse(dir / "unsorted.csv", options(dir), out, err), cli::kDataError);
  EXPECT_NE(err.str().find("sorted"), std::string::npos) << err.str();

  testing::write_file(dir / "late.csv", h + "25.0,LiDAR,3,0,0.01,0,0.001\n");
  EXPECT_EQ(cli::cmd_fuse(dir / "late.csv", options(dir), out, err), cli::kDataError);
}

TEST(Cli, EvaluationErrorsExitFour) {
  const fs::path dir = testing::temp_dir("eval");
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_run(options(dir), out, err), cli::kOk) << err.str();
  // Truth cut short of the log's span.
  const std::string truth = testing::read_file(dir / "truth.csv");
  std::string head;
  std::istringstream lines(truth);
  std::string line;
  for (int i = 0; i < 100 && std::getline(lines, line); ++i) head += line + "\n";
  testing::write_file(dir / "short_truth.csv", head);
  EXPECT_EQ(cli::cmd_report(dir / "log.csv", dir / "short_truth.csv", dir / "r", "x", out, err),
            cli::kEvaluationError);
  // An empty log is an evaluation problem too.
  testing::write_file(dir / "empty_log.csv", std::string(kLogHeader) + "\n");
  EXPECT_EQ(cli::cmd_report(dir / "empty_log.csv", dir / "truth.csv", dir / "r", "x", out, err),
            cli::kEvaluationError);
  EXPECT_EQ(cli::cmd_report(dir / "nope.csv", dir / "truth.csv", dir / "r", "x", out, err),
            cli::kDataError);
}

}  // namespace
}  // namespace tunnelfuse
