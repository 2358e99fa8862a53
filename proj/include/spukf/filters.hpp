#pragma once

// The five estimators. Every filter is a pure step function: predict the
// moments from t to t + dt, then apply the shared Kalman measurement update.
// Filters differ only in how the propagated sigma points (or, for the EKF, the
// linearized covariance) are produced.

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spukf/models.hpp"
#include "spukf/unscented.hpp"

namespace spukf {

struct StateEstimate {
  double t = 0.0;
  Vector mean;
  Matrix cov;
};

struct FilterConfig {
  std::optional<double> kappa;  // unset: default_kappa(n)
  int substeps = 2;
  double simplex_w0 = 0.5;
  JacobianMode jacobian_mode = JacobianMode::analytic;
  // Regenerate sigma points from the predicted mean and covariance (including Q)
  // before the measurement transform; without it Q never reaches S and P_YZ.
  bool redraw_for_measurement = true;

  double kappa_for(Eigen::Index n) const { return kappa.value_or(default_kappa(n)); }
};

struct PredictedMoments {
  double t = 0.0;
  Vector state_mean;
  Matrix state_cov;
  Vector meas_mean;
  Matrix innovation_cov;
  Matrix cross_cov;
  std::optional<SigmaPointSet> sigma_points;
};

enum class FilterKind { ekf, ukf, ssukf, spukf, espukf };

inline constexpr FilterKind kAllFilters[] = {FilterKind::ekf, FilterKind::ukf, FilterKind::ssukf,
                                             FilterKind::spukf, FilterKind::espukf};

inline std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::ekf: return "ekf";
    case FilterKind::ukf: return "ukf";
    case FilterKind::ssukf: return "ssukf";
    case FilterKind::spukf: return "spukf";
    case FilterKind::espukf: return "espukf";
  }
  return "unknown";
}

inline FilterKind parse_filter_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (FilterKind k : kAllFilters)
    if (lower == to_string(k)) return k;
  throw InvalidArgument("unknown filter '" + std::string(name) + "'");
}

inline void validate(const FilterConfig& cfg, Eigen::Index n) {
  if (cfg.substeps < 1) throw InvalidArgument("FilterConfig: substeps must be >= 1");
  if (!(static_cast<double>(n) + cfg.kappa_for(n) > 0.0))
    throw InvalidArgument("FilterConfig: n + kappa must be positive");
  if (!(cfg.simplex_w0 >= 0.0 && cfg.simplex_w0 < 1.0))
    throw InvalidArgument("FilterConfig: simplex_w0 must lie in [0, 1)");
}

namespace detail {

inline void check_inputs(const DynamicsModel& dyn, const MeasurementModel& meas,
                         const StateEstimate& est) {
  if (est.mean.size() != dyn.state_dim) throw DimensionMismatch("filter: state dimension");
  if (est.cov.rows() != dyn.state_dim || est.cov.cols() != dyn.state_dim)
    throw DimensionMismatch("filter: covariance dimension");
  if (dyn.process_noise.rows() != dyn.state_dim)
    throw DimensionMismatch("filter: process noise dimension");
  if (meas.meas_noise.rows() != meas.meas_dim || meas.meas_noise.cols() != meas.meas_dim)
    throw DimensionMismatch("filter: measurement noise dimension");
}

}  // namespace detail

/// Every sigma point integrated with RK4 (UKF and SSUKF propagation).
inline SigmaPointSet propagate_sigma_exact(const DynamicsModel& dyn, const SigmaPointSet& set,
                                           double t, double dt, int substeps) {
  SigmaPointSet out = set;
  for (std::size_t i = 0; i < set.size(); ++i)
    out.points[i] = propagate_mean(dyn, set.points[i], t, dt, substeps);
  for (std::size_t i = 0; i < set.size(); ++i) out.offsets[i] = out.points[i] - out.points[0];
  return out;
}

/// Single propagation: Y_i = Y_0(t + dt) + Phi dY_i with Phi evaluated at the prior mean.
inline SigmaPointSet propagate_sigma_spukf(const DynamicsModel& dyn, const SigmaPointSet& set,
                                           const Vector& mean, double t, double dt,
                                           const FilterConfig& cfg) {
  const Vector y0 = propagate_mean(dyn, mean, t, dt, cfg.substeps);
  const Matrix phi = state_transition_matrix(dyn, mean, t, dt, cfg.jacobian_mode);
  SigmaPointSet out = set;
  for (std::size_t i = 0; i < set.size(); ++i) {
    out.offsets[i] = phi * set.offsets[i];
    out.points[i] = y0 + out.offsets[i];
  }
  return out;
}

/// Richardson combination 2 N2(dY/2) - N1(dY) of the two first-order reconstructions.
inline Vector espukf_point(const Vector& y0, const Matrix& phi0, const Matrix& phi_mid,
                           const Vector& dy) {
  const Vector n1 = y0 + phi0 * dy;
  const Vector n2 = y0 + phi0 * (0.5 * dy) + phi_mid * (0.5 * dy);
  return 2.0 * n2 - n1;
}

/// Algebraically reduced form of espukf_point.
inline Vector espukf_point_simplified(const Vector& y0, const Matrix& phi_mid, const Vector& dy) {
  return y0 + phi_mid * dy;
}

inline SigmaPointSet propagate_sigma_espukf(const DynamicsModel& dyn, const SigmaPointSet& set,
                                            const Vector& mean, double t, double dt,
                                            const FilterConfig& cfg) {
  const Vector y0 = propagate_mean(dyn, mean, t, dt, cfg.substeps);
  const Matrix phi0 = state_transition_matrix(dyn, mean, t, dt, cfg.jacobian_mode);
  SigmaPointSet out = set;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vector& dy = set.offsets[i];
    if (dy.isZero(0.0)) {
      out.points[i] = y0;
      continue;
    }
    const Matrix phi_mid =
        state_transition_matrix(dyn, mean + 0.5 * dy, t, dt, cfg.jacobian_mode);
    out.points[i] = espukf_point(y0, phi0, phi_mid, dy);
  }
  for (std::size_t i = 0; i < set.size(); ++i) out.offsets[i] = out.points[i] - out.points[0];
  return out;
}

/// Predicted state and measurement moments from an already propagated sigma set.
inline PredictedMoments moments_from_sigma(SigmaPointSet propagated, const DynamicsModel& dyn,
                                           const MeasurementModel& meas, double t_next,
                                           const FilterConfig& cfg = {}) {
  PredictedMoments pm;
  pm.t = t_next;
  pm.state_mean = ut_mean(propagated);
  pm.state_cov = ut_covariance(propagated, pm.state_mean) + dyn.process_noise;

  const SigmaPointSet* meas_set = &propagated;
  SigmaPointSet redrawn;
  if (cfg.redraw_for_measurement) {
    redrawn = propagated.simplex
                  ? generate_simplex_sigma_points(pm.state_mean, pm.state_cov, propagated.weights[0])
                  : generate_sigma_points(pm.state_mean, pm.state_cov, propagated.kappa);
    meas_set = &redrawn;
  }

  std::vector<Vector> z;
  z.reserve(meas_set->size());
  for (const auto& y : meas_set->points) {
    z.push_back(meas.h(y));
    if (z.back().size() != meas.meas_dim)
      throw DimensionMismatch("measurement function output dimension");
  }
  pm.meas_mean = ut_mean(z, meas_set->weights);
  pm.innovation_cov = ut_covariance(z, meas_set->weights, pm.meas_mean) + meas.meas_noise;
  pm.cross_cov = ut_cross_covariance(*meas_set, z, pm.state_mean, pm.meas_mean);
  pm.sigma_points = std::move(propagated);
  return pm;
}

inline PredictedMoments ekf_predict(const DynamicsModel& dyn, const MeasurementModel& meas,
                                    const StateEstimate& est, double dt,
                                    const FilterConfig& cfg) {
  detail::check_inputs(dyn, meas, est);
  PredictedMoments pm;
  pm.t = est.t + dt;
  pm.state_mean = propagate_mean(dyn, est.mean, est.t, dt, cfg.substeps);
  const Matrix phi = state_transition_matrix(dyn, est.mean, est.t, dt, cfg.jacobian_mode);
  pm.state_cov = symmetrized(phi * est.cov * phi.transpose()) + dyn.process_noise;

  const Matrix h = meas.jacobian_at(pm.state_mean, cfg.jacobian_mode);
  pm.meas_mean = meas.h(pm.state_mean);
  pm.innovation_cov = symmetrized(h * pm.state_cov * h.transpose()) + meas.meas_noise;
  pm.cross_cov = pm.state_cov * h.transpose();
  return pm;
}

inline PredictedMoments ukf_predict(const DynamicsModel& dyn, const MeasurementModel& meas,
                                    const StateEstimate& est, double dt,
                                    const FilterConfig& cfg) {
  detail::check_inputs(dyn, meas, est);
  const auto set = generate_sigma_points(est.mean, est.cov, cfg.kappa_for(est.mean.size()));
  return moments_from_sigma(propagate_sigma_exact(dyn, set, est.t, dt, cfg.substeps), dyn, meas,
                            est.t + dt, cfg);
}

inline PredictedMoments ssukf_predict(const DynamicsModel& dyn, const MeasurementModel& meas,
                                      const StateEstimate& est, double dt,
                                      const FilterConfig& cfg) {
  detail::check_inputs(dyn, meas, est);
  const auto set = generate_simplex_sigma_points(est.mean, est.cov, cfg.simplex_w0);
  return moments_from_sigma(propagate_sigma_exact(dyn, set, est.t, dt, cfg.substeps), dyn, meas,
                            est.t + dt, cfg);
}

inline PredictedMoments spukf_predict(const DynamicsModel& dyn, const MeasurementModel& meas,
                                      const StateEstimate& est, double dt,
                                      const FilterConfig& cfg) {
  detail::check_inputs(dyn, meas, est);
  const auto set = generate_sigma_points(est.mean, est.cov, cfg.kappa_for(est.mean.size()));
  return moments_from_sigma(propagate_sigma_spukf(dyn, set, est.mean, est.t, dt, cfg), dyn, meas,
                            est.t + dt, cfg);
}

inline PredictedMoments espukf_predict(const DynamicsModel& dyn, const MeasurementModel& meas,
                                       const StateEstimate& est, double dt,
                                       const FilterConfig& cfg) {
  detail::check_inputs(dyn, meas, est);
  const auto set = generate_sigma_points(est.mean, est.cov, cfg.kappa_for(est.mean.size()));
  return moments_from_sigma(propagate_sigma_espukf(dyn, set, est.mean, est.t, dt, cfg), dyn,
                            meas, est.t + dt, cfg);
}

/// K = P_YZ S^-1, mean += K (z - z_hat), P -= K S K^T.
inline StateEstimate kalman_update(const PredictedMoments& pred, const Vector& z) {
  if (z.size() != pred.meas_mean.size()) throw DimensionMismatch("kalman_update: measurement");
  if (!z.allFinite()) throw InvalidArgument("kalman_update: non-finite measurement");

  const Eigen::LLT<Matrix> llt(pred.innovation_cov);
  if (llt.info() != Eigen::Success) throw SingularInnovation();
  const Matrix gain = llt.solve(pred.cross_cov.transpose()).transpose();
  if (!gain.allFinite()) throw SingularInnovation();

  StateEstimate out;
  out.t = pred.t;
  out.mean = pred.state_mean + gain * (z - pred.meas_mean);
  out.cov = symmetrized(pred.state_cov - gain * pred.innovation_cov * gain.transpose());
  return out;
}

inline PredictedMoments predict(FilterKind kind, const DynamicsModel& dyn,
                                const MeasurementModel& meas, const StateEstimate& est, double dt,
                                const FilterConfig& cfg) {
  switch (kind) {
    case FilterKind::ekf: return ekf_predict(dyn, meas, est, dt, cfg);
    case FilterKind::ukf: return ukf_predict(dyn, meas, est, dt, cfg);
    case FilterKind::ssukf: return ssukf_predict(dyn, meas, est, dt, cfg);
    case FilterKind::spukf: return spukf_predict(dyn, meas, est, dt, cfg);
    case FilterKind::espukf: return espukf_predict(dyn, meas, est, dt, cfg);
  }
  throw InvalidArgument("predict: unknown filter kind");
}

inline StateEstimate filter_step(FilterKind kind, const DynamicsModel& dyn,
                                 const MeasurementModel& meas, const StateEstimate& est,
                                 const Vector& z, double dt, const FilterConfig& cfg) {
  return kalman_update(predict(kind, dyn, meas, est, dt, cfg), z);
}

inline StateEstimate ekf_step(const DynamicsModel& dyn, const MeasurementModel& meas,
                              const StateEstimate& est, const Vector& z, double dt,
                              const FilterConfig& cfg) {
  return kalman_update(ekf_predict(dyn, meas, est, dt, cfg), z);
}

}  // namespace spukf
