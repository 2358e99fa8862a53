#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "spukf/filters.hpp"

namespace spukf {

/// A fully generated benchmark instance: models, truth, measurements and the
/// common filter initialization. Generated once per seed and shared by all filters.
struct ScenarioData {
  std::string name;
  DynamicsModel dyn;
  // Either a single model used at every epoch or one per epoch (index k >= 1).
  std::vector<MeasurementModel> meas;
  std::vector<double> times;  // t_0 .. t_N
  std::vector<Vector> truth;  // state at each time
  std::vector<Vector> z;      // measurement at each time; z[0] unused
  StateEstimate initial;      // estimate at times[0]
  FilterConfig filter_cfg;
  double steady_start = 0.0;  // steady-state averaging window [start, end]
  double steady_end = 0.0;
  std::vector<std::string> error_labels;
  // Scalar error reported per step and averaged over the steady window.
  std::function<double(const Vector& err)> metric;

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double dt(std::size_t k) const { return times[k] - times[k - 1]; }
  const MeasurementModel& meas_at(std::size_t k) const {
    return meas.size() == 1 ? meas.front() : meas.at(k);
  }
};

}  // namespace spukf
