#include <gtest/gtest.h>

#include <cmath>

#include "spukf/reentry.hpp"

using namespace spukf;

TEST(ReentryDynamics, NominalState) {
  const Vector d = reentry_dynamics(Vector{{300000.0, 20000.0, 1e-3}});
  EXPECT_EQ(d(0), -20000.0);
  EXPECT_NEAR(d(1), -std::exp(-15.0) * 4e8 * 1e-3, 1e-15);
  EXPECT_NEAR(d(1), -0.12236, 1e-5);
  EXPECT_EQ(d(2), 0.0);
  EXPECT_EQ(reentry_dynamics(Vector{{-5e4, 1.0, 3.0}})(2), 0.0);
}

TEST(ReentryDynamics, JacobianMatchesDifferences) {
  const Vector x{{150000.0, 12000.0, 2e-3}};
  const Matrix j = reentry_jacobian(x);
  const Vector h{{1.0, 0.5, 1e-9}};
  for (Eigen::Index c = 0; c < 3; ++c) {
    Vector up = x, dn = x;
    up(c) += h(c);
    dn(c) -= h(c);
    const Vector col = (reentry_dynamics(up) - reentry_dynamics(dn)) / (2 * h(c));
    EXPECT_LT((col - j.col(c)).norm(), 1e-6 * j.col(c).norm());
  }
}

TEST(RadarRange, Examples) {
  const ReentryConfig cfg;
  EXPECT_EQ(radar_range(Vector{{100000.0, 0.0, 0.0}}, cfg), 100000.0);
  EXPECT_NEAR(radar_range(Vector{{300000.0, 0.0, 0.0}}, cfg), std::sqrt(5e10), 1e-9);
  EXPECT_NEAR(radar_range(Vector{{300000.0, 0.0, 0.0}}, cfg), 223606.8, 0.05);
  for (double d : {1.0, 1234.5, 2e5})
    EXPECT_EQ(radar_range(Vector{{1e5 + d, 0.0, 0.0}}, cfg), radar_range(Vector{{1e5 - d, 0.0, 0.0}}, cfg));
}

TEST(ReentryConfig, Defaults) {
  const ReentryConfig c;
  EXPECT_EQ(c.lambda_coeff, 5e-5);
  EXPECT_EQ(c.radar_altitude, 1e5);
  EXPECT_EQ(c.radar_offset, 1e5);
  EXPECT_EQ(c.true_initial_state, (Vector{{3e5, 2e4, 1e-3}}));
  EXPECT_EQ(c.init_estimate, (Vector{{3e5, 2e4, 3e-5}}));
  EXPECT_EQ(Matrix(c.init_cov), Matrix(Vector{{1e6, 4e6, 1e-4}}.asDiagonal()));
  EXPECT_EQ(c.process_q, 1e-30 * Matrix::Identity(3, 3));
  EXPECT_EQ(c.meas_variance, 1e4);
  EXPECT_NO_THROW(validate(c));
}

TEST(ReentryConfig, Validation) {
  ReentryConfig c;
  c.dt = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ReentryConfig{};
  c.init_cov(0, 0) = -1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ReentryConfig{};
  c.true_initial_state = Vector::Zero(2);
  EXPECT_THROW(validate(c), ConfigError);
  c = ReentryConfig{};
  c.steady_start = 2000.0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(ReentryTruth, NoiselessMeasurementsAreExactRanges) {
  ReentryConfig c;
  c.process_q = Matrix::Zero(3, 3);
  c.meas_variance = 0.0;
  c.duration = 50.0;
  const auto truth = simulate_reentry_truth(c, 7);
  for (std::size_t k = 0; k < truth.times.size(); ++k)
    EXPECT_EQ(truth.measurements[k](0), radar_range(truth.states[k], c));
}

TEST(ReentryTruth, DeterministicPerSeed) {
  ReentryConfig c;
  c.duration = 100.0;
  const auto a = simulate_reentry_truth(c, 42), b = simulate_reentry_truth(c, 42), d = simulate_reentry_truth(c, 43);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    EXPECT_EQ(a.states[k], b.states[k]);
    EXPECT_EQ(a.measurements[k], b.measurements[k]);
  }
  EXPECT_NE(a.measurements[5], d.measurements[5]);
}

TEST(ReentryTruth, AltitudeDecreasesEarly) {
  ReentryConfig c;
  c.duration = 60.0;
  const auto truth = simulate_reentry_truth(c, 1);
  EXPECT_EQ(truth.states.front()(0), 300000.0);
  for (std::size_t k = 1; k < truth.states.size(); ++k) EXPECT_LT(truth.states[k](0), truth.states[k - 1](0));
}

TEST(ReentryScenario, Structure) {
  ReentryConfig c;
  c.duration = 20.0;
  const auto s = make_reentry_scenario(c, 5);
  EXPECT_EQ(s.dyn.state_dim, 3);
  EXPECT_EQ(s.meas.size(), 1u);
  EXPECT_EQ(s.steps(), static_cast<std::size_t>(20.0 / c.dt));
  EXPECT_EQ(s.initial.mean, c.init_estimate);
  EXPECT_EQ(s.metric(Vector{{-3.0, 100.0, 1.0}}), 3.0);
  EXPECT_NEAR(s.dt(1), c.dt, 1e-15);
}
