#pragma once

// Radar tracking of a ballistic body re-entering the atmosphere. State is
// (altitude ft, downward speed ft/s, ballistic coefficient); a radar offset
// horizontally by M at altitude H measures slant range.

#include <cmath>
#include <cstdint>
#include <random>

#include "spukf/scenario.hpp"

namespace spukf {

struct ReentryConfig {
  double lambda_coeff = 5e-5;
  double radar_altitude = 1e5;
  double radar_offset = 1e5;
  Vector true_initial_state = Vector{{3e5, 2e4, 1e-3}};
  Vector init_estimate = Vector{{3e5, 2e4, 3e-5}};
  Matrix init_cov = Vector{{1e6, 4e6, 1e-4}}.asDiagonal();
  Matrix process_q = 1e-30 * Matrix::Identity(3, 3);
  double meas_variance = 1e4;
  double dt = 0.5;
  double duration = 1000.0;
  int substeps = 2;
  int truth_substeps = 16;
  double steady_start = 200.0;
  double steady_end = 1000.0;
};

inline void validate(const ReentryConfig& c) {
  if (!(c.lambda_coeff > 0 && c.radar_altitude > 0 && c.radar_offset > 0))
    throw ConfigError("reentry: lambda, H and M must be positive");
  if (c.true_initial_state.size() != 3 || c.init_estimate.size() != 3)
    throw ConfigError("reentry: states must have 3 components");
  if (c.init_cov.rows() != 3 || c.init_cov.cols() != 3 || c.process_q.rows() != 3 ||
      c.process_q.cols() != 3)
    throw ConfigError("reentry: covariances must be 3 x 3");
  if (!(c.meas_variance >= 0) || !(c.dt > 0) || !(c.duration >= c.dt))
    throw ConfigError("reentry: need meas_variance >= 0, dt > 0 and duration >= dt");
  if (c.substeps < 1 || c.truth_substeps < 1) throw ConfigError("reentry: substeps must be >= 1");
  if (!(c.steady_start <= c.steady_end)) throw ConfigError("reentry: empty steady-state window");
  for (const Matrix* m : {&c.init_cov, &c.process_q}) {
    if (!is_symmetric(*m)) throw ConfigError("reentry: covariance not symmetric");
    try {
      cholesky_factor(*m);
    } catch (const NotPositiveDefinite&) {
      throw ConfigError("reentry: covariance not positive semi-definite");
    }
  }
}

inline Vector reentry_dynamics(const Vector& x, double lambda = 5e-5) {
  const double e = std::exp(-lambda * x(0));
  return Vector{{-x(1), -e * x(1) * x(1) * x(2), 0.0}};
}

inline Matrix reentry_jacobian(const Vector& x, double lambda = 5e-5) {
  const double e = std::exp(-lambda * x(0));
  Matrix j = Matrix::Zero(3, 3);
  j(0, 1) = -1.0;
  j(1, 0) = lambda * e * x(1) * x(1) * x(2);
  j(1, 1) = -2.0 * e * x(1) * x(2);
  j(1, 2) = -e * x(1) * x(1);
  return j;
}

inline double radar_range(const Vector& x, const ReentryConfig& cfg) {
  const double dz = x(0) - cfg.radar_altitude;
  return std::sqrt(cfg.radar_offset * cfg.radar_offset + dz * dz);
}

inline DynamicsModel reentry_dynamics_model(const ReentryConfig& cfg) {
  DynamicsModel m;
  m.state_dim = 3;
  const double lambda = cfg.lambda_coeff;
  m.deriv = [lambda](double, const Vector& y) { return reentry_dynamics(y, lambda); };
  m.jacobian = [lambda](double, const Vector& y) { return reentry_jacobian(y, lambda); };
  m.process_noise = cfg.process_q;
  return m;
}

inline MeasurementModel reentry_measurement_model(const ReentryConfig& cfg) {
  MeasurementModel m;
  m.meas_dim = 1;
  m.h = [cfg](const Vector& y) { return Vector::Constant(1, radar_range(y, cfg)); };
  m.h_jacobian = [cfg](const Vector& y) {
    Matrix j = Matrix::Zero(1, 3);
    j(0, 0) = (y(0) - cfg.radar_altitude) / radar_range(y, cfg);
    return j;
  };
  m.meas_noise = Matrix::Constant(1, 1, cfg.meas_variance);
  return m;
}

struct ReentryTruth {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> measurements;  // measurements[0] is generated but not used by filters
};

/// Stochastic truth: RK4 between steps plus additive N(0, Q) after each step; noisy ranges.
inline ReentryTruth simulate_reentry_truth(const ReentryConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix q_root = cholesky_factor(cfg.process_q);
  const double sigma = std::sqrt(cfg.meas_variance);
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  const double lambda = cfg.lambda_coeff;
  auto f = [lambda](double, const Vector& y) { return reentry_dynamics(y, lambda); };

  ReentryTruth out;
  Vector x = cfg.true_initial_state;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    if (k > 0) {
      x = rk4_propagate(f, x, t - cfg.dt, cfg.dt, cfg.truth_substeps);
      Vector w(3);
      for (int i = 0; i < 3; ++i) w(i) = normal(rng);
      x += q_root * w;
    }
    out.times.push_back(t);
    out.states.push_back(x);
    out.measurements.push_back(Vector::Constant(1, radar_range(x, cfg) + sigma * normal(rng)));
  }
  return out;
}

inline ScenarioData make_reentry_scenario(const ReentryConfig& cfg, std::uint64_t seed) {
  auto truth = simulate_reentry_truth(cfg, seed);
  ScenarioData s;
  s.name = "reentry";
  s.dyn = reentry_dynamics_model(cfg);
  s.meas = {reentry_measurement_model(cfg)};
  s.times = std::move(truth.times);
  s.truth = std::move(truth.states);
  s.z = std::move(truth.measurements);
  s.initial = StateEstimate{0.0, cfg.init_estimate, cfg.init_cov};
  s.filter_cfg.substeps = cfg.substeps;
  s.steady_start = cfg.steady_start;
  s.steady_end = cfg.steady_end;
  s.error_labels = {"altitude", "velocity", "ballistic"};
  s.metric = [](const Vector& err) { return std::abs(err(0)); };
  return s;
}

}  // namespace spukf
