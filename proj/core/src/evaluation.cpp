#include "tunnelfuse/evaluation.hpp"

#include "tunnelfuse/csv_io.hpp"
#include "tunnelfuse/errors.hpp"
#include "tunnelfuse/svg_plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace tunnelfuse {

namespace {

constexpr double kSpanSlack = 1e-9;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

ErrorSample error_at(const TrajectoryRecord& r, std::span<const GroundTruthSample> truth) {
  ErrorSample e;
  e.t = r.stamp.seconds;
  e.truth = interpolate_truth(truth, e.t);
  const Eigen::Vector2d d(r.state.x() - e.truth.x(), r.state.y() - e.truth.y());
  e.position_error = d.norm();
  e.heading_error = wrap_angle(r.state.psi() - e.truth.psi());
  e.nees = nees_2d(d, r.position_covariance());
  return e;
}

}  // namespace

double nees_2d(const Eigen::Vector2d& error, const Eigen::Matrix2d& cov) {
  const double a = cov(0, 0);
  const double b = 0.5 * (cov(0, 1) + cov(1, 0));
  const double c = cov(1, 1);
  const double det = a * c - b * b;
  if (!(a > 0.0) || !(det > 0.0)) return std::numeric_limits<double>::infinity();
  // Closed-form inverse of the symmetric 2x2 block.
  const double ex = error.x();
  const double ey = error.y();
  return (c * ex * ex - 2.0 * b * ex * ey + a * ey * ey) / det;
}

StateVector interpolate_truth(std::span<const GroundTruthSample> truth, double t) {
  if (truth.empty()) throw InvalidArgument("interpolate_truth: no truth samples");
  const double t0 = truth.front().stamp.seconds;
  const double t1 = truth.back().stamp.seconds;
  if (t < t0 - kSpanSlack || t > t1 + kSpanSlack) {
    throw InvalidArgument("interpolate_truth: t = " + std::to_string(t) + " outside [" +
                          std::to_string(t0) + ", " + std::to_string(t1) + "]");
  }
  auto it = std::upper_bound(truth.begin(), truth.end(), t, [](double v, const GroundTruthSample& s) {
    return v < s.stamp.seconds;
  });
  if (it == truth.begin()) return truth.front().state;
  const GroundTruthSample& lo = *std::prev(it);
  if (lo.stamp.seconds == t || it == truth.end()) return lo.state;
  const GroundTruthSample& hi = *it;
  const double alpha = (t - lo.stamp.seconds) / (hi.stamp.seconds - lo.stamp.seconds);
  StateVec x = lo.state.vector() + alpha * (hi.state.vector() - lo.state.vector());
  x[kPsi] = lo.state.psi() + alpha * wrap_angle(hi.state.psi() - lo.state.psi());
  return StateVector(x);
}

ErrorReport compute_errors(const TrajectoryLog& log, std::span<const GroundTruthSample> truth) {
  if (log.empty()) throw InvalidArgument("compute_errors: empty log");
  if (truth.empty()) throw InvalidArgument("compute_errors: empty truth");
  const double first = log.records.front().stamp.seconds;
  const double last = log.records.back().stamp.seconds;
  if (first < truth.front().stamp.seconds - kSpanSlack ||
      last > truth.back().stamp.seconds + kSpanSlack) {
    throw InvalidArgument("compute_errors: log spans [" + std::to_string(first) + ", " +
                          std::to_string(last) + "] but truth covers [" +
                          std::to_string(truth.front().stamp.seconds) + ", " +
                          std::to_string(truth.back().stamp.seconds) + "]");
  }

  ErrorReport rep;
  rep.series.reserve(log.size());
  double sum_pos2 = 0.0;
  double sum_psi2 = 0.0;
  double sum_nees = 0.0;
  std::size_t inside = 0;
  for (const auto& r : log.records) {
    const ErrorSample e = error_at(r, truth);
    sum_pos2 += e.position_error * e.position_error;
    sum_psi2 += e.heading_error * e.heading_error;
    sum_nees += e.nees;
    if (e.nees >= kNees2Lower95 && e.nees <= kNees2Upper95) ++inside;
    rep.max_position_error = std::max(rep.max_position_error, e.position_error);
    rep.series.push_back(e);
  }
  const auto n = static_cast<double>(log.size());
  rep.position_rmse = std::sqrt(sum_pos2 / n);
  rep.heading_rmse = std::sqrt(sum_psi2 / n);
  rep.nees_mean = sum_nees / n;
  rep.nees_fraction_inside = static_cast<double>(inside) / n;
  rep.final_position_error = rep.series.back().position_error;
  return rep;
}

void export_csv(const TrajectoryLog& log, std::span<const GroundTruthSample> truth,
                const std::filesystem::path& path) {
  std::string text = std::string(kLogHeader) + "\n";
  for (const auto& r : log.records) {
    const ErrorSample e = error_at(r, truth);
    const double values[] = {e.t,
                             e.truth.x(),
                             e.truth.y(),
                             e.truth.psi(),
                             r.state.x(),
                             r.state.y(),
                             r.state.psi(),
                             r.state.v(),
                             r.state.psi_dot(),
                             e.position_error,
                             e.heading_error,
                             e.nees,
                             r.cov_diagonal[kX],
                             r.cov_diagonal[kY]};
    for (double v : values) {
      text += format_number(v, 9);
      text += ',';
    }
    text += to_string(r.source);
    text += '\n';
  }
  write_text(path, text);
}

std::string report_to_json(const ErrorReport& report, const std::string& scenario_name) {
  nlohmann::ordered_json doc;
  doc["scenario"] = scenario_name;
  doc["position_rmse"] = report.position_rmse;
  doc["max_position_error"] = report.max_position_error;
  doc["final_position_error"] = report.final_position_error;
  doc["heading_rmse"] = report.heading_rmse;
  doc["nees_mean"] = report.nees_mean;
  doc["nees_fraction_inside_95"] = report.nees_fraction_inside;
  doc["nees_bounds_95"] = {kNees2Lower95, kNees2Upper95};
  nlohmann::ordered_json series = nlohmann::ordered_json::object();
  std::vector<double> t;
  std::vector<double> pos;
  std::vector<double> psi;
  std::vector<double> nees;
  for (const auto& e : report.series) {
    t.push_back(e.t);
    pos.push_back(e.position_error);
    psi.push_back(e.heading_error);
    nees.push_back(e.nees);
  }
  series["t"] = t;
  series["position_error"] = pos;
  series["heading_error"] = psi;
  series["nees"] = nees;
  doc["series"] = series;
  return doc.dump(2) + "\n";
}

void write_report_json(const ErrorReport& report, const std::string& scenario_name,
                       const std::filesystem::path& path) {
  write_text(path, report_to_json(report, scenario_name));
}

void render_plots(const ErrorReport& report, const TrajectoryLog& log,
                  std::span<const GroundTruthSample> truth, const std::filesystem::path& out_dir) {
  if (log.empty()) throw InvalidArgument("render_plots: empty log");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());

  PlotSeries truth_xy{"truth", "#1f77b4", {}, {}};
  for (const auto& s : truth) {
    truth_xy.x.push_back(s.state.x());
    truth_xy.y.push_back(s.state.y());
  }
  PlotSeries est_xy{"estimate", "#d62728", {}, {}};
  PlotSeries est_psi{"estimate", "#d62728", {}, {}};
  for (const auto& r : log.records) {
    est_xy.x.push_back(r.state.x());
    est_xy.y.push_back(r.state.y());
    est_psi.x.push_back(r.stamp.seconds);
    est_psi.y.push_back(rad_to_deg(r.state.psi()));
  }
  PlotSeries truth_psi{"truth", "#1f77b4", {}, {}};
  PlotSeries err{"position error", "#d62728", {}, {}};
  for (const auto& e : report.series) {
    truth_psi.x.push_back(e.t);
    truth_psi.y.push_back(rad_to_deg(e.truth.psi()));
    err.x.push_back(e.t);
    err.y.push_back(e.position_error);
  }

  write_text(out_dir / "trajectory.svg",
             render_line_plot({"Top-down trajectory", "x [m]", "y [m]", true},
                              {truth_xy, est_xy}));
  write_text(out_dir / "heading.svg",
             render_line_plot({"Heading", "t [s]", "psi [deg]"}, {truth_psi, est_psi}));
  write_text(out_dir / "pos_error.svg",
             render_line_plot({"Position error", "t [s]", "error [m]"}, {err}));
}

}  // namespace tunnelfuse
