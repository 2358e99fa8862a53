#pragma once

// Ready-made order-of-accuracy probe configurations for the two scenarios.
// The frozen-Jacobian transition matrix carries an error linear in the sigma
// offsets of size O(dt^2), so the probes use a short interval and wide spread
// where the higher-order reconstruction error dominates.

#include <string_view>
#include <vector>

#include "spukf/diagnostics.hpp"
#include "spukf/gnss.hpp"
#include "spukf/reentry.hpp"

namespace spukf {

struct ProbeSetup {
  DynamicsModel dyn;
  StateEstimate est;
  double dt = 0.0;
  FilterConfig cfg;
  std::vector<double> scales;
};

inline ProbeSetup reentry_probe_setup(const ReentryConfig& c = {}) {
  ProbeSetup p;
  p.dyn = reentry_dynamics_model(c);
  p.est = StateEstimate{0.0, Vector{{1e5, 2e4, 1e-3}}, Vector{{1e8, 4e6, 1e-10}}.asDiagonal()};
  p.dt = 1e-3;
  p.cfg.substeps = 1;
  p.scales = {1.0, 0.5, 0.25, 0.125};
  return p;
}

inline ProbeSetup gnss_probe_setup(const GnssConfig& c = {}) {
  ProbeSetup p;
  p.dyn = leo_dynamics_model(c);
  Vector var(8);
  var << Vector::Constant(3, 1e10), Vector::Constant(3, 1e4), Vector::Constant(2, 1e-14);
  p.est = StateEstimate{0.0, initial_leo_state(c).to_vector(), var.asDiagonal()};
  p.dt = 1.0;
  p.cfg.substeps = c.substeps;
  p.scales = {1.0, 0.5, 0.25, 0.125};
  return p;
}

inline OrderProbeResult run_probe(const ProbeSetup& p, ApproxMethod method) {
  return order_probe(p.dyn, p.est, p.dt, p.cfg, method, p.scales);
}

}  // namespace spukf
