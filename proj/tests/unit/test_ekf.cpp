#include "tunnelfuse/ekf.hpp"
#include "tunnelfuse/errors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

namespace tunnelfuse {
namespace {

using testing::Gen;

// Independent oracle: classic RK4 on the continuous model.
StateVec rk4(StateVec x, double duration, double h) {
  const auto f = [](const StateVec& s) {
    StateVec d;
    d << s[kV] * std::cos(s[kPsi]), s[kV] * std::sin(s[kPsi]), s[kVDot], 0.0, s[kPsiDot],
        s[kPsiDDot], 0.0;
    return d;
  };
  const int n = static_cast<int>(std::lround(duration / h));
  for (int i = 0; i < n; ++i) {
    const StateVec k1 = f(x);
    const StateVec k2 = f(x + 0.5 * h * k1);
    const StateVec k3 = f(x + 0.5 * h * k2);
    const StateVec k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

double state_distance(const StateVec& a, const StateVec& b) {
  StateVec d = a - b;
  d[kPsi] = wrap_angle(d[kPsi]);
  return d.norm();
}

TEST(Dynamics, Examples) {
  EXPECT_EQ(dynamics(StateVector()), StateVec::Zero());
  StateVec e;
  e << 2, 0, 0, 0, 0, 0, 0;
  EXPECT_LT((dynamics(StateVector(0, 0, 2, 0, 0, 0, 0)) - e).norm(), 1e-15);
  e << 0, 2, 0, 0, 0, 0, 0;
  EXPECT_LT((dynamics(StateVector(0, 0, 2, 0, kPi / 2, 0, 0)) - e).norm(), 1e-15);
}

TEST(Discretize, RestStateIsFixedPoint) {
  for (double ts : {1e-3, 0.1, 5.0}) {
    EXPECT_EQ(discretize(StateVector(), ts).vector(), StateVec::Zero());
  }
}

TEST(Discretize, StraightLine) {
  const StateVector x = discretize(StateVector(0, 0, 1, 0, 0, 0, 0), 0.1);
  EXPECT_NEAR(x.x(), 0.1, 1e-15);
  EXPECT_EQ(x.y(), 0.0);
  EXPECT_EQ(x.v(), 1.0);
  EXPECT_EQ(x.psi(), 0.0);
}

TEST(Discretize, TurningMatchesRk4ToFourthOrder) {
  const StateVec x0 = StateVector(0, 0, 1, 0, 0, 1, 0).vector();
  const double ts = 0.1;
  const StateVec oracle = rk4(x0, ts, 1e-4);
  // Local truncation is O(ts^4); (v psi_dot^3 ts^4 / 24) bounds the leading term.
  EXPECT_LT(state_distance(discretize(StateVector(x0), ts).vector(), oracle), 1e-5);
}

TEST(Discretize, RejectsNonPositiveStep) {
  EXPECT_THROW(discretize(StateVector(), 0.0), InvalidArgument);
  EXPECT_THROW(discretize(StateVector(), -0.1), InvalidArgument);
  EXPECT_THROW(process_noise(0.0, {}), InvalidArgument);
}

TEST(JacobianDiscrete, ZeroStepLimitIsIdentity) {
  Gen g(1);
  for (int i = 0; i < 10; ++i) {
    const StateMat j = jacobian_discrete(g.state(), 1e-9);
    EXPECT_LT((j - StateMat::Identity()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(JacobianDiscrete, LinearSubsystemEntry) {
  EXPECT_DOUBLE_EQ(jacobian_discrete(StateVector(), 0.1)(kPsi, kPsiDot), 0.1);
}

TEST(JacobianDiscrete, MatchesCentralDifferences) {
  Gen g(2);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector x = g.state();
    const double ts = 0.05;
    const StateMat analytic = jacobian_discrete(x, ts);
    for (int c = 0; c < kStateDim; ++c) {
      StateVec xp = x.vector();
      StateVec xm = x.vector();
      xp[c] += h;
      xm[c] -= h;
      StateVec diff = discretize(StateVector(xp), ts).vector() - discretize(StateVector(xm), ts).vector();
      diff[kPsi] = wrap_angle(diff[kPsi]);
      const StateVec numeric = diff / (2.0 * h);
      for (int r = 0; r < kStateDim; ++r) {
        EXPECT_NEAR(analytic(r, c), numeric[r], 1e-5 * std::max(1.0, std::abs(numeric[r])))
            << "entry (" << r << ", " << c << ")";
      }
    }
  }
}

TEST(ProcessNoise, UnitStepClosedForm) {
  const StateMat r = process_noise(1.0, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(r(kV, kV), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r(kV, kVDot), 0.5);
  EXPECT_DOUBLE_EQ(r(kVDot, kV), 0.5);
  EXPECT_DOUBLE_EQ(r(kVDot, kVDot), 1.0);
  EXPECT_DOUBLE_EQ(r(kX, kX), 1e-9);
  EXPECT_DOUBLE_EQ(r(kY, kY), 1e-9);
}

TEST(ProcessNoise, ZeroDensitiesLeaveFloorOnly) {
  const double ts = 0.37;
  StateVec floor = StateVec::Zero();
  floor[kX] = floor[kY] = 1e-9 * ts;
  const StateMat expected = floor.asDiagonal();
  EXPECT_EQ(process_noise(ts, {0.0, 0.0}), expected);
}

TEST(ProcessNoise, VelocityVarianceScalesWithCube) {
  const ProcessNoiseParams p{0.7, 0.3};
  EXPECT_NEAR(process_noise(0.05, p)(kV, kV) / process_noise(0.1, p)(kV, kV), 0.125, 1e-12);
}

TEST(ProcessNoise, MatchesMonteCarloOfSampledJerk) {
  // Integrate piecewise-constant white jerk on a fine grid and compare the
  // sample covariance of the resulting (v, v_dot) and (psi, psi_dot,
  // psi_ddot) offsets with the closed form.
  const double ts = 1.0;
  const ProcessNoiseParams params{0.8, 0.3};
  const int substeps = 200;
  const int trials = 20000;
  const double h = ts / substeps;
  Gen g(3);
  Eigen::Matrix2d lin = Eigen::Matrix2d::Zero();
  Eigen::Matrix3d yaw = Eigen::Matrix3d::Zero();
  for (int n = 0; n < trials; ++n) {
    double v = 0, a = 0, psi = 0, w = 0, al = 0;
    for (int k = 0; k < substeps; ++k) {
      const double j = g.normal(std::sqrt(params.jerk_spectral_density / h));
      const double jy = g.normal(std::sqrt(params.yaw_jerk_spectral_density / h));
      v += a * h + 0.5 * j * h * h;
      a += j * h;
      psi += w * h + 0.5 * al * h * h + jy * h * h * h / 6.0;
      w += al * h + 0.5 * jy * h * h;
      al += jy * h;
    }
    const Eigen::Vector2d e(v, a);
    const Eigen::Vector3d ey(psi, w, al);
    lin += e * e.transpose();
    yaw += ey * ey.transpose();
  }
  lin /= trials;
  yaw /= trials;
  const StateMat r = process_noise(ts, params);
  const Eigen::Matrix2d r_lin = r.block<2, 2>(kV, kV);
  const Eigen::Matrix3d r_yaw = r.block<3, 3>(kPsi, kPsi);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(lin(i, j), r_lin(i, j), 0.04 * std::sqrt(r_lin(i, i) * r_lin(j, j)));
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(yaw(i, j), r_yaw(i, j), 0.04 * std::sqrt(r_yaw(i, i) * r_yaw(j, j)));
    }
  }
}

TEST(Predict, DegenerateStep) {
  const CovarianceMatrix p = CovarianceMatrix::from_diagonal(StateVec::Constant(0.5));
  const auto [x, q] = predict(StateVector(), p, 1e-6, {0.0, 0.0});
  EXPECT_EQ(x.vector(), StateVec::Zero());
  EXPECT_LT((q.matrix() - p.matrix()).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Predict, ChainedStepsAgreeWithFinerSteps) {
  const StateVector x0(0, 0, 3.0, 0.2, 0.1, 0.15, -0.01);
  const ProcessNoiseParams params;
  CovarianceMatrix p0;
  auto run = [&](double ts, int n) {
    StateVector x = x0;
    CovarianceMatrix p = p0;
    for (int i = 0; i < n; ++i) std::tie(x, p) = predict(x, p, ts, params);
    return x;
  };
  const StateVector coarse = run(0.01, 1000);
  const StateVector fine = run(0.001, 10000);
  EXPECT_LT(std::hypot(coarse.x() - fine.x(), coarse.y() - fine.y()), 1e-4);
}

TEST(MeasurementMatrix, SelectsVelocityAndYawRate) {
  // Both sensors observe through
  //   [0 0 1 0 0 0 0]
  //   [0 0 0 0 0 1 0]
  MeasurementMatrix expected = MeasurementMatrix::Zero();
  expected(0, 2) = 1.0;
  expected(1, 5) = 1.0;
  EXPECT_EQ(measurement_matrix(Sensor::kLidar), expected);
  EXPECT_EQ(measurement_matrix(Sensor::kThermal), expected);

  StateVec x;
  x << 0, 0, 3, 0, 0, 0.5, 0;
  EXPECT_EQ(measurement_matrix(Sensor::kLidar) * x, Eigen::Vector2d(3.0, 0.5));
}

PseudoMeasurement meas(double v, double w, double qv, double qw, double t = 0.0,
                       Sensor s = Sensor::kLidar) {
  PseudoMeasurement m;
  m.v_meas = v;
  m.psi_dot_meas = w;
  m.noise = Eigen::Vector2d(qv, qw).asDiagonal();
  m.stamp = Timestamp(t);
  m.source = s;
  return m;
}

TEST(Correct, ZeroInnovationKeepsState) {
  const StateVector x(1, 2, 3, 0.1, 0.4, 0.2, 0.0);
  const FilterStep s = correct(x, CovarianceMatrix(), meas(3.0, 0.2, 0.1, 0.01));
  EXPECT_EQ(s.posterior_state.vector(), x.vector());
  EXPECT_EQ(s.innovation, Eigen::Vector2d::Zero());
  EXPECT_EQ(s.source, Sensor::kLidar);
}

TEST(Correct, UninformativeMeasurement) {
  const StateVector x(1, 2, 3, 0.1, 0.4, 0.2, 0.0);
  const FilterStep s = correct(x, CovarianceMatrix(), meas(10.0, -3.0, 1e12, 1e12));
  for (int i = 0; i < kStateDim; ++i) {
    EXPECT_NEAR(s.posterior_state[i], x[i], 1e-6 * std::max(1.0, std::abs(x[i])));
  }
}

TEST(Correct, ScalarKalmanOracle) {
  // With diagonal P and Q each observed channel is an independent scalar
  // update: the posterior is the precision-weighted average.
  StateVec d;
  d << 1, 1, 0.4, 0.2, 0.1, 0.05, 0.01;
  const StateVector x(0, 0, 2.0, 0, 0, 0.1, 0);
  const double qv = 0.09;
  const double qw = 0.0025;
  const double yv = 2.6;
  const double yw = 0.04;
  const FilterStep s = correct(x, CovarianceMatrix::from_diagonal(d), meas(yv, yw, qv, qw));
  const double pv = d[kV];
  const double pw = d[kPsiDot];
  EXPECT_NEAR(s.posterior_state.v(), (x.v() / pv + yv / qv) / (1 / pv + 1 / qv), 1e-12);
  EXPECT_NEAR(s.posterior_state.psi_dot(), (x.psi_dot() / pw + yw / qw) / (1 / pw + 1 / qw),
              1e-12);
  EXPECT_NEAR(s.posterior_cov(kV, kV), 1.0 / (1 / pv + 1 / qv), 1e-12);
  EXPECT_NEAR(s.posterior_cov(kPsiDot, kPsiDot), 1.0 / (1 / pw + 1 / qw), 1e-12);
  // Unobserved, uncorrelated channels are untouched.
  EXPECT_EQ(s.posterior_state.x(), 0.0);
  EXPECT_EQ(s.posterior_cov(kX, kX), 1.0);
}

TEST(Correct, SingularInnovationThrows) {
  StateVec d = StateVec::Constant(1e-13);
  EXPECT_THROW(correct(StateVector(), CovarianceMatrix::from_diagonal(d), meas(1, 0, 1e3, 1e-13)),
               SingularUpdate);
}

FilterOptions options(double end_time) {
  FilterOptions o;
  o.end_time = end_time;
  return o;
}

TEST(RunFilter, EmptyStreamIsDeadReckoning) {
  const StateVector x0(0, 0, 2.0, 0.1, 0.3, 0.05, 0.01);
  const FilterRun run = run_filter({}, x0, CovarianceMatrix(), options(1.0));
  StateVector x = x0;
  for (int i = 0; i < 100; ++i) x = discretize(x, 0.01);
  ASSERT_FALSE(run.log.empty());
  EXPECT_DOUBLE_EQ(run.log.records.back().stamp.seconds, 1.0);
  EXPECT_LT(state_distance(run.log.records.back().state.vector(), x.vector()), 1e-9);
  EXPECT_EQ(run.correction_count(), 0u);
  EXPECT_EQ(run.log.records.front().source, UpdateSource::kInitial);
}

TEST(RunFilter, ConsistentEventMatchesDeadReckoning) {
  const StateVector x0(0, 0, 2.0, 0.1, 0.3, 0.05, 0.01);
  const FilterRun dr = run_filter({}, x0, CovarianceMatrix(), options(1.0));
  const TrajectoryRecord* at = nullptr;
  for (const auto& r : dr.log.records) {
    if (std::abs(r.stamp.seconds - 0.5) < 1e-12) at = &r;
  }
  ASSERT_NE(at, nullptr);
  const std::vector<PseudoMeasurement> ev{meas(at->state.v(), at->state.psi_dot(), 0.1, 0.01, 0.5)};
  const FilterRun run = run_filter(ev, x0, CovarianceMatrix(), options(1.0));
  EXPECT_EQ(run.correction_count(), 1u);
  // The event run reaches t = 0.5 through a differently split last step.
  EXPECT_LT(state_distance(run.log.records.back().state.vector(), dr.log.records.back().state.vector()),
            1e-12);
}

TEST(RunFilter, InterleavedSourcesCorrectInScheduleOrder) {
  std::vector<PseudoMeasurement> ev;
  for (int k = 1; k <= 20; ++k) ev.push_back(meas(1.0, 0.0, 0.1, 0.01, k / 10.0, Sensor::kLidar));
  for (int k = 1; k <= 10; ++k) ev.push_back(meas(1.0, 0.0, 0.1, 0.01, k / 5.0, Sensor::kThermal));
  std::stable_sort(ev.begin(), ev.end(), event_before);
  const FilterRun run = run_filter(ev, StateVector(0, 0, 1, 0, 0, 0, 0), CovarianceMatrix(),
                                   options(2.0));
  std::vector<const FilterStep*> corrections;
  for (const auto& s : run.steps) {
    if (s.source) corrections.push_back(&s);
  }
  ASSERT_EQ(corrections.size(), 30u);
  for (std::size_t i = 0; i < corrections.size(); ++i) {
    EXPECT_EQ(corrections[i]->stamp.seconds, ev[i].stamp.seconds);
    EXPECT_EQ(*corrections[i]->source, ev[i].source);
  }
}

TEST(RunFilter, PredictionStepsNeverExceedTsMax) {
  const std::vector<PseudoMeasurement> ev{meas(1, 0, 0.1, 0.01, 0.123), meas(1, 0, 0.1, 0.01, 0.5)};
  FilterOptions o = options(0.8);
  o.ts_max = 0.02;
  const FilterRun run = run_filter(ev, StateVector(), CovarianceMatrix(), o);
  double t = 0.0;
  for (const auto& s : run.steps) {
    EXPECT_LE(s.stamp.seconds - t, 0.02 + 1e-12);
    EXPECT_GE(s.stamp.seconds, t);
    t = s.stamp.seconds;
  }
  for (std::size_t i = 1; i < run.log.size(); ++i) {
    EXPECT_LT(run.log.records[i - 1].stamp.seconds, run.log.records[i].stamp.seconds);
  }
  EXPECT_DOUBLE_EQ(run.log.records.back().stamp.seconds, 0.8);
}

TEST(RunFilter, RejectsBadEvents) {
  const std::vector<PseudoMeasurement> unsorted{meas(1, 0, 1, 1, 0.2), meas(1, 0, 1, 1, 0.1)};
  EXPECT_THROW(run_filter(unsorted, StateVector(), CovarianceMatrix(), {}), InvalidArgument);
  const std::vector<PseudoMeasurement> tie{meas(1, 0, 1, 1, 0.1, Sensor::kThermal),
                                           meas(1, 0, 1, 1, 0.1, Sensor::kLidar)};
  EXPECT_THROW(run_filter(tie, StateVector(), CovarianceMatrix(), {}), InvalidArgument);
  const std::vector<PseudoMeasurement> negative{meas(1, 0, 1, 1, -0.1)};
  EXPECT_THROW(run_filter(negative, StateVector(), CovarianceMatrix(), {}), InvalidArgument);
  const std::vector<PseudoMeasurement> late{meas(1, 0, 1, 1, 2.0)};
  EXPECT_THROW(run_filter(late, StateVector(), CovarianceMatrix(), options(1.0)), InvalidArgument);
}

TEST(RunFilter, SkipsSingularUpdates) {
  StateVec d = StateVec::Constant(1e-13);
  const std::vector<PseudoMeasurement> ev{meas(1, 0, 1e3, 1e-13, 0.05)};
  // Without process noise the prior stays tiny, so S is about diag(1e3, 2e-13).
  FilterOptions o = options(0.1);
  o.process.jerk_spectral_density = 0.0;
  o.process.yaw_jerk_spectral_density = 0.0;
  const FilterRun run = run_filter(ev, StateVector(), CovarianceMatrix::from_diagonal(d), o);
  ASSERT_EQ(run.skipped.size(), 1u);
  EXPECT_EQ(run.correction_count(), 0u);
  EXPECT_GT(run.skipped[0].condition, kMaxInnovationCondition);
}

}  // namespace
}  // namespace tunnelfuse
