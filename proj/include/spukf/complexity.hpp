#pragma once

// Analytic upper bounds on the per-step propagation cost, in units of the
// slowest basic scalar operation, for the UKF and the two single-propagation
// filters.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "spukf/errors.hpp"

namespace spukf {

enum class CostAlgo { ukf, spukf, espukf };

inline std::string_view to_string(CostAlgo a) {
  switch (a) {
    case CostAlgo::ukf: return "ukf";
    case CostAlgo::spukf: return "spukf";
    case CostAlgo::espukf: return "espukf";
  }
  return "unknown";
}

struct CostModelParams {
  int n = 1;  // state dimension
  int j = 1;  // basic-operation count of one dynamics evaluation
  int h = 1;  // integration substeps
};

inline void validate(const CostModelParams& p) {
  if (p.n < 1 || p.j < 1 || p.h < 1)
    throw InvalidArgument("CostModelParams: n, j and h must be >= 1");
}

inline double cost_bound(CostAlgo algo, const CostModelParams& p) {
  validate(p);
  const double n = p.n, j = p.j, h = p.h;
  switch (algo) {
    case CostAlgo::ukf:
      return 26 * h * n * n + (8 * h * j + 23 * h) * n + 4 * h * j + 5 * h;
    case CostAlgo::spukf:
      return 5 * n * n * n + 4 * n * n + (13 * h + j + 3) * n + 4 * h * j + 5 * h;
    case CostAlgo::espukf:
      return 6 * n * n * n * n + 11 * n * n * n + (2 * j + 18) * n * n +
             (13 * h + 3 * j + 4) * n + 4 * h * j + 5 * h;
  }
  throw InvalidArgument("cost_bound: unknown algorithm");
}

/// Percentage by which the algorithm's bound undercuts the UKF's; negative when it is costlier.
inline double reduction_percent(CostAlgo algo, const CostModelParams& p) {
  validate(p);
  const double n = p.n, j = p.j, h = p.h;
  const double ukf = cost_bound(CostAlgo::ukf, p);
  switch (algo) {
    case CostAlgo::ukf: return 0.0;
    case CostAlgo::spukf:
      return (-5 * n * n * n + (26 * h - 4) * n * n + (8 * h * j + 10 * h - j - 3) * n) / ukf *
             100.0;
    case CostAlgo::espukf:
      return (-6 * n * n * n * n - 11 * n * n * n + (26 * h - 2 * j - 18) * n * n +
              (8 * h * j + 10 * h - 3 * j - 4) * n) /
             ukf * 100.0;
  }
  throw InvalidArgument("reduction_percent: unknown algorithm");
}

namespace detail {

// The limit polynomial divided by n; its positive root is the state-dimension limit.
inline double limit_poly_over_n(CostAlgo algo, double n, double j, double h) {
  if (algo == CostAlgo::spukf) return 5 * n * n - (26 * h - 4) * n - (8 * h * j + 10 * h - j - 3);
  return 6 * n * n * n + 11 * n * n - (26 * h - 2 * j - 18) * n - (8 * h * j + 10 * h - 3 * j - 4);
}

}  // namespace detail

/// Largest state dimension (real-valued) at which the algorithm still beats the UKF bound.
inline double state_dim_limit(CostAlgo algo, int j, int h) {
  if (algo == CostAlgo::ukf) throw InvalidArgument("state_dim_limit: ukf has no limit");
  if (j < 1 || h < 1) throw InvalidArgument("state_dim_limit: j and h must be >= 1");
  auto q = [&](double n) { return detail::limit_poly_over_n(algo, n, j, h); };

  double lo = 0.0;
  double hi = 1.0;
  if (q(lo) >= 0.0) throw NoPositiveRoot("state_dim_limit: polynomial is non-negative at 0");
  while (q(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NoPositiveRoot("state_dim_limit: no sign change below n = 1e6");
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace spukf
