#pragma once

// Sigma-point construction (symmetric kappa form and spherical simplex) and
// the weighted moment reductions of the unscented transform.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "spukf/numerics.hpp"

namespace spukf {

struct SigmaPointSet {
  std::vector<Vector> points;
  std::vector<double> weights;
  // Offsets from points[0], kept verbatim because the single-propagation
  // filters rebuild propagated points from them.
  std::vector<Vector> offsets;
  double kappa = 0.0;
  bool simplex = false;

  std::size_t size() const { return points.size(); }
  Eigen::Index dim() const { return points.empty() ? 0 : points.front().size(); }
};

/// n + kappa = 3 when that keeps W_0 non-negative, otherwise kappa = 0.
inline double default_kappa(Eigen::Index n) {
  return std::max(0.0, 3.0 - static_cast<double>(n));
}

/// 2n + 1 points: mean and mean +/- columns of chol((n + kappa) P).
inline SigmaPointSet generate_sigma_points(const Vector& mean, const Matrix& cov, double kappa) {
  const Eigen::Index n = mean.size();
  if (cov.rows() != n || cov.cols() != n)
    throw DimensionMismatch("generate_sigma_points: covariance dimension");
  const double spread = static_cast<double>(n) + kappa;
  if (!(spread > 0.0)) throw InvalidArgument("generate_sigma_points: n + kappa must be positive");

  const Matrix root = cholesky_factor(cov, spread);

  SigmaPointSet set;
  set.kappa = kappa;
  set.points.reserve(2 * n + 1);
  set.offsets.reserve(2 * n + 1);
  set.weights.assign(2 * n + 1, 1.0 / (2.0 * spread));
  set.weights[0] = kappa / spread;

  set.offsets.push_back(Vector::Zero(n));
  for (Eigen::Index i = 0; i < n; ++i) set.offsets.push_back(root.col(i));
  for (Eigen::Index i = 0; i < n; ++i) set.offsets.push_back(-root.col(i));
  for (const auto& d : set.offsets) set.points.push_back(mean + d);
  return set;
}

/// Unit spherical-simplex vertices for dimension n with vertex weight w1
/// (Julier's recursive construction). Column 0 is the origin.
inline Matrix unit_simplex_points(Eigen::Index n, double w1) {
  Matrix pts = Matrix::Zero(n, n + 2);
  if (n == 0) return pts;
  pts(0, 1) = -1.0 / std::sqrt(2.0 * w1);
  pts(0, 2) = 1.0 / std::sqrt(2.0 * w1);
  for (Eigen::Index j = 2; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    const double denom = std::sqrt(jd * (jd + 1.0) * w1);
    for (Eigen::Index i = 1; i <= j; ++i) pts(j - 1, i) = -1.0 / denom;
    pts(j - 1, j + 1) = jd / denom;
  }
  return pts;
}

/// n + 2 points: the mean (weight w0) and n + 1 simplex vertices on a hypersphere.
inline SigmaPointSet generate_simplex_sigma_points(const Vector& mean, const Matrix& cov,
                                                   double w0) {
  const Eigen::Index n = mean.size();
  if (cov.rows() != n || cov.cols() != n)
    throw DimensionMismatch("generate_simplex_sigma_points: covariance dimension");
  if (!(w0 >= 0.0 && w0 < 1.0))
    throw InvalidArgument("generate_simplex_sigma_points: w0 must lie in [0, 1)");

  const double w1 = (1.0 - w0) / static_cast<double>(n + 1);
  const Matrix root = cholesky_factor(cov);
  const Matrix unit = unit_simplex_points(n, w1);

  SigmaPointSet set;
  set.simplex = true;
  set.weights.assign(n + 2, w1);
  set.weights[0] = w0;
  for (Eigen::Index i = 0; i < n + 2; ++i) {
    set.offsets.push_back(root * unit.col(i));
    set.points.push_back(mean + set.offsets.back());
  }
  return set;
}

inline Vector ut_mean(const std::vector<Vector>& points, const std::vector<double>& weights) {
  if (points.empty() || points.size() != weights.size())
    throw DimensionMismatch("ut_mean: points and weights must be non-empty and aligned");
  Vector mean = Vector::Zero(points.front().size());
  for (std::size_t i = 0; i < points.size(); ++i) mean += weights[i] * points[i];
  return mean;
}

inline Vector ut_mean(const SigmaPointSet& set) { return ut_mean(set.points, set.weights); }

namespace detail {

// Columns are the points minus the mean.
inline Matrix deviations(const std::vector<Vector>& points, const Vector& mean) {
  Matrix dev(mean.size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != mean.size()) throw DimensionMismatch("sigma point dimension");
    dev.col(static_cast<Eigen::Index>(i)) = points[i] - mean;
  }
  return dev;
}

inline Eigen::Map<const Eigen::VectorXd> weight_vector(const std::vector<double>& weights) {
  return {weights.data(), static_cast<Eigen::Index>(weights.size())};
}

}  // namespace detail

inline Matrix ut_covariance(const std::vector<Vector>& points, const std::vector<double>& weights,
                            const Vector& mean) {
  if (points.size() != weights.size()) throw DimensionMismatch("ut_covariance: weights");
  const Matrix dev = detail::deviations(points, mean);
  const Matrix cov = dev * detail::weight_vector(weights).asDiagonal() * dev.transpose();
  return symmetrized(cov);
}

inline Matrix ut_covariance(const SigmaPointSet& set, const Vector& mean) {
  return ut_covariance(set.points, set.weights, mean);
}

inline Matrix ut_cross_covariance(const std::vector<Vector>& state_points,
                                  const std::vector<Vector>& meas_points,
                                  const Vector& state_mean, const Vector& meas_mean,
                                  const std::vector<double>& weights) {
  if (state_points.size() != meas_points.size() || state_points.size() != weights.size())
    throw DimensionMismatch("ut_cross_covariance: point counts differ");
  const Matrix dy = detail::deviations(state_points, state_mean);
  const Matrix dz = detail::deviations(meas_points, meas_mean);
  return dy * detail::weight_vector(weights).asDiagonal() * dz.transpose();
}

inline Matrix ut_cross_covariance(const SigmaPointSet& state_set,
                                  const std::vector<Vector>& meas_points,
                                  const Vector& state_mean, const Vector& meas_mean) {
  return ut_cross_covariance(state_set.points, meas_points, state_mean, meas_mean,
                             state_set.weights);
}

/// Stacks process noise onto the state: mean (y; 0), covariance [[P, C], [C^T, Q]].
inline std::pair<Vector, Matrix> augment_state(const Vector& mean, const Matrix& cov,
                                               const Matrix& q,
                                               const std::optional<Matrix>& cross = std::nullopt) {
  const Eigen::Index n = mean.size();
  const Eigen::Index nq = q.rows();
  if (cov.rows() != n || cov.cols() != n) throw DimensionMismatch("augment_state: P dimension");
  if (q.cols() != nq) throw DimensionMismatch("augment_state: Q must be square");
  if (cross && (cross->rows() != n || cross->cols() != nq))
    throw DimensionMismatch("augment_state: cross covariance dimension");

  Vector aug_mean = Vector::Zero(n + nq);
  aug_mean.head(n) = mean;
  Matrix aug_cov = Matrix::Zero(n + nq, n + nq);
  aug_cov.topLeftCorner(n, n) = cov;
  aug_cov.bottomRightCorner(nq, nq) = q;
  if (cross) {
    aug_cov.topRightCorner(n, nq) = *cross;
    aug_cov.bottomLeftCorner(nq, n) = cross->transpose();
  }
  return {aug_mean, aug_cov};
}

}  // namespace spukf
