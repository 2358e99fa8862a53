#pragma once

// Side-by-side exact and single-propagation sigma-point reconstruction, and an
// empirical order-of-accuracy estimator built on it.

#include <cmath>
#include <utility>
#include <vector>

#include "spukf/filters.hpp"

namespace spukf {

enum class ApproxMethod { spukf, espukf };

inline std::string_view to_string(ApproxMethod m) {
  return m == ApproxMethod::spukf ? "spukf" : "espukf";
}

inline ApproxMethod parse_approx_method(std::string_view name) {
  if (name == "spukf") return ApproxMethod::spukf;
  if (name == "espukf") return ApproxMethod::espukf;
  throw InvalidArgument("unknown approximation method '" + std::string(name) + "'");
}

struct FidelityReport {
  std::vector<Vector> per_point_errors;  // exact minus approximate, per sigma point
  Vector mean_error;
  double cov_error_norm = 0.0;  // Frobenius norm of the predicted covariance difference
  double delta_y_scale = 0.0;   // largest sigma offset norm

  double max_point_error() const {
    double m = 0.0;
    for (const auto& e : per_point_errors) m = std::max(m, e.norm());
    return m;
  }
};

inline FidelityReport compare_sigma_propagation(const DynamicsModel& dyn, const StateEstimate& est,
                                                double dt, const FilterConfig& cfg,
                                                ApproxMethod method) {
  if (est.mean.size() != dyn.state_dim) throw DimensionMismatch("compare_sigma_propagation");
  validate(cfg, est.mean.size());
  const auto set = generate_sigma_points(est.mean, est.cov, cfg.kappa_for(est.mean.size()));
  const auto exact = propagate_sigma_exact(dyn, set, est.t, dt, cfg.substeps);
  const auto approx = method == ApproxMethod::spukf
                          ? propagate_sigma_spukf(dyn, set, est.mean, est.t, dt, cfg)
                          : propagate_sigma_espukf(dyn, set, est.mean, est.t, dt, cfg);

  FidelityReport rep;
  rep.mean_error = Vector::Zero(est.mean.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    rep.per_point_errors.push_back(exact.points[i] - approx.points[i]);
    rep.mean_error += set.weights[i] * rep.per_point_errors.back();
    rep.delta_y_scale = std::max(rep.delta_y_scale, set.offsets[i].norm());
  }
  const Matrix p_exact = ut_covariance(exact, ut_mean(exact));
  const Matrix p_approx = ut_covariance(approx, ut_mean(approx));
  rep.cov_error_norm = (p_exact - p_approx).norm();
  return rep;
}

enum class ProbeStatus { fitted, exact_regime };

struct OrderProbeResult {
  std::vector<std::pair<double, double>> samples;  // (scale, max point error)
  std::vector<double> delta_y;                     // max offset norm at each scale
  double slope = 0.0;
  ProbeStatus status = ProbeStatus::exact_regime;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidArgument("loglog_slope: abscissae coincide");
  return sxy / sxx;
}

/// Runs compare_sigma_propagation with the covariance scaled by s^2 for each s in
/// `scales` and fits the log-log slope of max point error against max offset norm.
/// Errors at round-off level are excluded; if fewer than two remain the result is
/// reported as ExactRegime.
inline OrderProbeResult order_probe(const DynamicsModel& dyn, const StateEstimate& est, double dt,
                                    const FilterConfig& cfg, ApproxMethod method,
                                    const std::vector<double>& scales) {
  if (scales.empty()) throw InvalidArgument("order_probe: no scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw InvalidArgument("order_probe: scales must be positive");
    if (i > 0 && !(scales[i] < scales[i - 1]))
      throw InvalidArgument("order_probe: scales must be strictly descending");
  }

  OrderProbeResult res;
  std::vector<double> xs, ys;
  for (double s : scales) {
    StateEstimate scaled = est;
    scaled.cov = est.cov * (s * s);
    const auto rep = compare_sigma_propagation(dyn, scaled, dt, cfg, method);
    const double err = rep.max_point_error();
    res.samples.emplace_back(s, err);
    res.delta_y.push_back(rep.delta_y_scale);

    const double floor = 1e-11 * (est.mean.norm() + rep.delta_y_scale);
    if (err > floor && rep.delta_y_scale > 0.0) {
      xs.push_back(rep.delta_y_scale);
      ys.push_back(err);
    }
  }
  if (xs.size() >= 2) {
    res.slope = loglog_slope(xs, ys);
    res.status = ProbeStatus::fitted;
  }
  return res;
}

}  // namespace spukf
