#include "tunnelfuse/ekf.hpp"

#include "tunnelfuse/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace tunnelfuse {

StateVec default_initial_covariance_diagonal() {
  StateVec d;
  d << 1.0, 1.0, 0.25, 0.25, 0.05, 0.01, 0.01;
  return d;
}

StateVec dynamics(const StateVector& x) {
  StateVec d;
  d << x.v() * std::cos(x.psi()), x.v() * std::sin(x.psi()), x.v_dot(), 0.0,
      x.psi_dot(), x.psi_ddot(), 0.0;
  return d;
}

namespace {

void require_positive_step(double ts, const char* where) {
  if (!(ts > 0.0) || !std::isfinite(ts)) {
    throw InvalidArgument(std::string(where) + ": step must be positive and finite");
  }
}

}  // namespace

StateVector discretize(const StateVector& x, double ts) {
  require_positive_step(ts, "discretize");
  const double v = x.v();
  const double a = x.v_dot();
  const double w = x.psi_dot();
  const double al = x.psi_ddot();
  const double c = std::cos(x.psi());
  const double s = std::sin(x.psi());
  const double t1 = ts;
  const double t2 = ts * ts / 2.0;
  const double t3 = ts * ts * ts / 6.0;

  // First and second time derivatives of (v cos psi, v sin psi) along the flow.
  const double dx1 = a * c - v * w * s;
  const double dy1 = a * s + v * w * c;
  const double dx2 = -2.0 * a * w * s - v * al * s - v * w * w * c;
  const double dy2 = 2.0 * a * w * c + v * al * c - v * w * w * s;

  return StateVector(x.x() + t1 * v * c + t2 * dx1 + t3 * dx2,
                     x.y() + t1 * v * s + t2 * dy1 + t3 * dy2,
                     v + t1 * a,
                     a,
                     x.psi() + t1 * w + t2 * al,
                     w + t1 * al,
                     al);
}

StateMat jacobian_discrete(const StateVector& x, double ts) {
  require_positive_step(ts, "jacobian_discrete");
  const double v = x.v();
  const double a = x.v_dot();
  const double w = x.psi_dot();
  const double al = x.psi_ddot();
  const double c = std::cos(x.psi());
  const double s = std::sin(x.psi());
  const double t1 = ts;
  const double t2 = ts * ts / 2.0;
  const double t3 = ts * ts * ts / 6.0;

  StateMat g = StateMat::Identity();

  g(kX, kV) = t1 * c - t2 * w * s + t3 * (-al * s - w * w * c);
  g(kX, kVDot) = t2 * c - t3 * 2.0 * w * s;
  g(kX, kPsi) = -t1 * v * s + t2 * (-a * s - v * w * c) +
                t3 * (-2.0 * a * w * c - v * al * c + v * w * w * s);
  g(kX, kPsiDot) = -t2 * v * s + t3 * (-2.0 * a * s - 2.0 * v * w * c);
  g(kX, kPsiDDot) = -t3 * v * s;

  g(kY, kV) = t1 * s + t2 * w * c + t3 * (al * c - w * w * s);
  g(kY, kVDot) = t2 * s + t3 * 2.0 * w * c;
  g(kY, kPsi) = t1 * v * c + t2 * (a * c - v * w * s) +
                t3 * (-2.0 * a * w * s - v * al * s - v * w * w * c);
  g(kY, kPsiDot) = t2 * v * c + t3 * (2.0 * a * c - 2.0 * v * w * s);
  g(kY, kPsiDDot) = t3 * v * c;

  g(kV, kVDot) = t1;
  g(kPsi, kPsiDot) = t1;
  g(kPsi, kPsiDDot) = t2;
  g(kPsiDot, kPsiDDot) = t1;
  return g;
}

StateMat process_noise(double ts, const ProcessNoiseParams& params) {
  require_positive_step(ts, "process_noise");
  if (params.jerk_spectral_density < 0.0 || params.yaw_jerk_spectral_density < 0.0) {
    throw InvalidArgument("process_noise: spectral densities must be non-negative");
  }
  const double t = ts;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;
  const double qv = params.jerk_spectral_density;
  const double qy = params.yaw_jerk_spectral_density;

  StateMat r = StateMat::Zero();
  r(kX, kX) = kPositionNoiseFloor * t;
  r(kY, kY) = kPositionNoiseFloor * t;

  r(kV, kV) = qv * t3 / 3.0;
  r(kV, kVDot) = r(kVDot, kV) = qv * t2 / 2.0;
  r(kVDot, kVDot) = qv * t;

  r(kPsi, kPsi) = qy * t5 / 20.0;
  r(kPsi, kPsiDot) = r(kPsiDot, kPsi) = qy * t4 / 8.0;
  r(kPsi, kPsiDDot) = r(kPsiDDot, kPsi) = qy * t3 / 6.0;
  r(kPsiDot, kPsiDot) = qy * t3 / 3.0;
  r(kPsiDot, kPsiDDot) = r(kPsiDDot, kPsiDot) = qy * t2 / 2.0;
  r(kPsiDDot, kPsiDDot) = qy * t;
  return r;
}

std::pair<StateVector, CovarianceMatrix> predict(const StateVector& state,
                                                 const CovarianceMatrix& cov,
                                                 double ts,
                                                 const ProcessNoiseParams& params) {
  const StateMat g = jacobian_discrete(state, ts);
  const StateMat p = g * cov.matrix() * g.transpose() + process_noise(ts, params);
  return {discretize(state, ts), CovarianceMatrix(p)};
}

MeasurementMatrix measurement_matrix(Sensor /*source*/) {
  MeasurementMatrix h = MeasurementMatrix::Zero();
  h(0, kV) = 1.0;
  h(1, kPsiDot) = 1.0;
  return h;
}

FilterStep correct(const StateVector& state, const CovarianceMatrix& cov,
                   const PseudoMeasurement& meas) {
  const MeasurementMatrix h = measurement_matrix(meas.source);
  const StateMat& p = cov.matrix();

  const Eigen::Matrix2d s = h * p * h.transpose() + meas.noise;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (s + s.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(1);
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxInnovationCondition)) {
    throw SingularUpdate("innovation covariance condition number " +
                         std::to_string(condition));
  }

  FilterStep step;
  step.prior_state = state;
  step.prior_cov = cov;
  step.source = meas.source;
  step.stamp = meas.stamp;
  step.gain = p * h.transpose() * s.inverse();
  step.innovation = meas.value() - h * state.vector();
  step.posterior_state = StateVector(state.vector() + step.gain * step.innovation);
  step.posterior_cov =
      CovarianceMatrix((StateMat::Identity() - step.gain * h) * p);
  return step;
}

std::size_t FilterRun::correction_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.source.has_value() ? 1 : 0;
  return n;
}

namespace {

UpdateSource to_update_source(const std::optional<Sensor>& s) {
  if (!s) return UpdateSource::kPrediction;
  return *s == Sensor::kLidar ? UpdateSource::kLidar : UpdateSource::kThermal;
}

TrajectoryRecord make_record(Timestamp stamp, const StateVector& x,
                             const CovarianceMatrix& p, UpdateSource source,
                             std::optional<Eigen::Vector2d> innovation) {
  TrajectoryRecord r;
  r.stamp = stamp;
  r.state = x;
  r.cov_diagonal = p.diagonal();
  r.cov_xy = p(kX, kY);
  r.source = source;
  r.innovation = innovation;
  return r;
}

void append_record(TrajectoryLog& log, TrajectoryRecord record) {
  if (!log.records.empty() && log.records.back().stamp == record.stamp) {
    log.records.back() = std::move(record);
  } else {
    log.records.push_back(std::move(record));
  }
}

}  // namespace

FilterRun run_filter(std::span<const PseudoMeasurement> events,
                     const StateVector& initial_state,
                     const CovarianceMatrix& initial_cov,
                     const FilterOptions& options) {
  if (!(options.ts_max > 0.0) || !std::isfinite(options.ts_max)) {
    throw InvalidArgument("run_filter: ts_max must be positive");
  }
  if (options.end_time && (!std::isfinite(*options.end_time) || *options.end_time < 0.0)) {
    throw InvalidArgument("run_filter: end_time must be finite and non-negative");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double t = events[i].stamp.seconds;
    if (!std::isfinite(t) || t < 0.0 ||
        (options.end_time && t > *options.end_time)) {
      throw InvalidArgument("run_filter: event " + std::to_string(i) +
                            " has out-of-range timestamp");
    }
    if (i > 0 && event_before(events[i], events[i - 1])) {
      throw InvalidArgument("run_filter: events not sorted at index " +
                            std::to_string(i));
    }
  }

  FilterRun run;
  StateVector x = initial_state;
  CovarianceMatrix p = initial_cov;
  double t = 0.0;
  append_record(run.log, make_record(Timestamp(0.0), x, p, UpdateSource::kInitial,
                                     std::nullopt));

  const auto advance_to = [&](double target) {
    while (t < target) {
      double next = t + options.ts_max;
      if (next > target - 1e-12) next = target;
      FilterStep step;
      step.prior_state = x;
      step.prior_cov = p;
      std::tie(x, p) = predict(x, p, next - t, options.process);
      t = next;
      step.posterior_state = x;
      step.posterior_cov = p;
      step.stamp = Timestamp(t);
      run.steps.push_back(std::move(step));
      append_record(run.log, make_record(Timestamp(t), x, p,
                                         UpdateSource::kPrediction, std::nullopt));
    }
  };

  for (const auto& ev : events) {
    advance_to(ev.stamp.seconds);
    try {
      FilterStep step = correct(x, p, ev);
      x = step.posterior_state;
      p = step.posterior_cov;
      append_record(run.log, make_record(ev.stamp, x, p, to_update_source(step.source),
                                         step.innovation));
      run.steps.push_back(std::move(step));
    } catch (const SingularUpdate&) {
      const Eigen::Matrix2d s =
          measurement_matrix(ev.source) * p.matrix() *
              measurement_matrix(ev.source).transpose() +
          ev.noise;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s, Eigen::EigenvaluesOnly);
      run.skipped.push_back({ev.stamp, ev.source,
                             es.eigenvalues()(1) / es.eigenvalues()(0)});
    }
  }
  if (options.end_time) advance_to(*options.end_time);
  return run;
}

}  // namespace tunnelfuse
