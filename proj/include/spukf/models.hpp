#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <utility>

#include "spukf/numerics.hpp"

namespace spukf {

using DerivFn = std::function<Vector(double t, const Vector& y)>;
using JacobianFn = std::function<Matrix(double t, const Vector& y)>;
using MeasurementFn = std::function<Vector(const Vector& y)>;
using MeasurementJacobianFn = std::function<Matrix(const Vector& y)>;

enum class JacobianMode { analytic, finite_difference };

/// Continuous-time process model y' = f(t, y) with additive per-step noise Q.
///
/// The noise argument of f is held at its mean (zero); stochastic forcing only
/// enters through `process_noise` on the predicted covariance.
struct DynamicsModel {
  int state_dim = 0;
  DerivFn deriv;
  JacobianFn jacobian;  // optional; finite differences are used when empty
  Matrix process_noise;

  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }

  Matrix jacobian_at(double t, const Vector& y, JacobianMode mode = JacobianMode::analytic) const {
    if (mode == JacobianMode::analytic && jacobian) return jacobian(t, y);
    return fd_jacobian([&](const Vector& x) { return deriv(t, x); }, y);
  }
};

/// Discrete measurement z = h(y) + w, w ~ N(0, R).
struct MeasurementModel {
  int meas_dim = 0;
  MeasurementFn h;
  MeasurementJacobianFn h_jacobian;  // optional
  Matrix meas_noise;

  Matrix jacobian_at(const Vector& y, JacobianMode mode = JacobianMode::analytic) const {
    if (mode == JacobianMode::analytic && h_jacobian) return h_jacobian(y);
    return fd_jacobian(h, y);
  }
};

inline void validate(const DynamicsModel& m) {
  if (m.state_dim < 1) throw InvalidArgument("DynamicsModel: state_dim must be positive");
  if (!m.deriv) throw InvalidArgument("DynamicsModel: missing derivative function");
  if (m.process_noise.rows() != m.state_dim || m.process_noise.cols() != m.state_dim)
    throw DimensionMismatch("DynamicsModel: Q must be n x n");
  if (!is_symmetric(m.process_noise)) throw InvalidArgument("DynamicsModel: Q not symmetric");
}

inline void validate(const MeasurementModel& m) {
  if (m.meas_dim < 1) throw InvalidArgument("MeasurementModel: meas_dim must be positive");
  if (!m.h) throw InvalidArgument("MeasurementModel: missing measurement function");
  if (m.meas_noise.rows() != m.meas_dim || m.meas_noise.cols() != m.meas_dim)
    throw DimensionMismatch("MeasurementModel: R must be m x m");
  if (!is_symmetric(m.meas_noise)) throw InvalidArgument("MeasurementModel: R not symmetric");
}

/// Noise-free RK4 propagation of a single state over [t, t + dt].
inline Vector propagate_mean(const DynamicsModel& model, const Vector& y, double t, double dt,
                             int substeps) {
  if (y.size() != model.state_dim) throw DimensionMismatch("propagate_mean: state dimension");
  return rk4_propagate(model.deriv, y, t, dt, substeps);
}

/// Phi = exp(J dt) with J the Jacobian of f at (t, y).
inline Matrix state_transition_matrix(const DynamicsModel& model, const Vector& y, double t,
                                      double dt, JacobianMode mode = JacobianMode::analytic) {
  if (y.size() != model.state_dim)
    throw DimensionMismatch("state_transition_matrix: state dimension");
  return matrix_exp(model.jacobian_at(t, y, mode), dt);
}

/// Shared call counters attached to an instrumented model.
struct EvalCounters {
  std::shared_ptr<std::atomic<long>> deriv = std::make_shared<std::atomic<long>>(0);
  std::shared_ptr<std::atomic<long>> jacobian = std::make_shared<std::atomic<long>>(0);

  long derivs() const { return deriv->load(); }
  long jacobians() const { return jacobian->load(); }
  void reset() const {
    deriv->store(0);
    jacobian->store(0);
  }
};

/// Wraps a model so every derivative and Jacobian evaluation is counted.
inline std::pair<DynamicsModel, EvalCounters> instrumented(DynamicsModel model) {
  EvalCounters counters;
  DerivFn f = std::move(model.deriv);
  model.deriv = [f, c = counters.deriv](double t, const Vector& y) {
    c->fetch_add(1, std::memory_order_relaxed);
    return f(t, y);
  };
  if (model.jacobian) {
    JacobianFn j = std::move(model.jacobian);
    model.jacobian = [j, c = counters.jacobian](double t, const Vector& y) {
      c->fetch_add(1, std::memory_order_relaxed);
      return j(t, y);
    };
  }
  return {std::move(model), counters};
}

}  // namespace spukf
