#pragma once

// Dense linear algebra and fixed-step integration primitives shared by all
// filters: covariance square roots, the matrix exponential used for state
// transition matrices, classical RK4 and central-difference Jacobians.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "spukf/errors.hpp"

namespace spukf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Lower-triangular L with L * L^T = scale * p.
///
/// Zero (or slightly negative, within -1e-12 * max diagonal) pivots are
/// tolerated and produce an all-zero column, so a rank-deficient covariance
/// yields sigma offsets that coincide with the mean.
inline Matrix cholesky_factor(const Matrix& p, double scale = 1.0) {
  if (p.rows() != p.cols()) throw DimensionMismatch("cholesky_factor: matrix is not square");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InvalidArgument("cholesky_factor: scale must be positive");
  if (!all_finite(p)) throw InvalidArgument("cholesky_factor: non-finite entry");
  if (!is_symmetric(p)) throw InvalidArgument("cholesky_factor: matrix is not symmetric");

  const Eigen::Index n = p.rows();
  Matrix a = scale * symmetrized(p);
  Matrix l = Matrix::Zero(n, n);
  if (n == 0) return l;

  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();
  const double neg_tol = 1e-12 * max_diag;

  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);

    if (pivot < -neg_tol) throw NotPositiveDefinite(static_cast<std::size_t>(j), pivot);
    // Round-off level pivot relative to the column's own variance: treat as rank loss.
    if (pivot <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(a(j, j))) continue;

    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / d;
    }
  }
  return l;
}

namespace detail {

// Pade coefficients and theta_m bounds (1-norm) for the scaling-and-squaring
// method of degree m = 3, 5, 7, 9, 13.
inline constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
inline constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
inline constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                                 25200.0,    1512.0,    56.0,      1.0};
inline constexpr std::array<double, 10> kPade9 = {
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
inline constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

inline constexpr double kTheta3 = 1.495585217958292e-2;
inline constexpr double kTheta5 = 2.539398330063230e-1;
inline constexpr double kTheta7 = 9.504178996162932e-1;
inline constexpr double kTheta9 = 2.097847961257068e0;
inline constexpr double kTheta13 = 5.371920351148152e0;

// Small fixed-size products are faster coefficient-wise than through the blocked kernel.
template <class M>
M mul(const M& a, const M& b) {
  if constexpr (M::RowsAtCompileTime != Eigen::Dynamic)
    return a.lazyProduct(b);
  else
    return a * b;
}

template <class M, std::size_t N>
void pade_low_degree(const M& a, const std::array<double, N>& b, M& u, M& v) {
  const Eigen::Index n = a.rows();
  const M id = M::Identity(n, n);
  const M a2 = mul(a, a);
  M odd = b[1] * id;
  v = b[0] * id;
  M power = id;
  for (std::size_t k = 2; k < N; k += 2) {
    power = mul(power, a2);
    v += b[k] * power;
    if (k + 1 < N) odd += b[k + 1] * power;
  }
  u = mul(a, odd);
}

template <class M>
void pade13(const M& a, M& u, M& v) {
  const auto& b = kPade13;
  const Eigen::Index n = a.rows();
  const M id = M::Identity(n, n);
  const M a2 = mul(a, a);
  const M a4 = mul(a2, a2);
  const M a6 = mul(a4, a2);
  M tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  M inner = mul(a6, tmp);
  u = mul(a, M(inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id));
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = mul(a6, tmp);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

inline double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// Power-of-two diagonal similarity D^-1 A D reducing the off-diagonal row and
// column norms (Parlett-Reinsch). When only the column (or only the row) of an
// index is populated it is shrunk to the size of the other off-diagonal
// entries, which the plain iteration cannot do. Returns the diagonal of D.
inline Vector balance(Matrix& a) {
  const Eigen::Index n = a.rows();
  Vector d = Vector::Ones(n);
  auto col_norm = [&](Eigen::Index j, Eigen::Index skip) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && i != skip) s += std::abs(a(i, j));
    return s;
  };
  auto row_norm = [&](Eigen::Index i, Eigen::Index skip) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i && j != skip) s += std::abs(a(i, j));
    return s;
  };

  for (int sweep = 0; sweep < 64; ++sweep) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = col_norm(i, -1);
      const double r = row_norm(i, -1);
      double f = 1.0;
      if (c > 0.0 && r > 0.0) {
        f = std::ldexp(1.0, std::ilogb(r / c) / 2);
        if (c * f + r / f >= 0.95 * (c + r)) f = 1.0;
      } else if (c > 0.0 || r > 0.0) {
        double target = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
          if (j != i) target = std::max(target, c > 0.0 ? col_norm(j, i) : row_norm(j, i));
        if (target > 0.0) {
          if (c > 2.0 * target) f = std::ldexp(1.0, std::ilogb(target / c));
          if (r > 2.0 * target) f = std::ldexp(1.0, std::ilogb(r / target) + 1);
        }
      }
      if (f != 1.0 && std::isfinite(f)) {
        a.col(i) *= f;
        a.row(i) /= f;
        d(i) *= f;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

// Scaling and squaring on an already balanced matrix of fixed or dynamic size.
template <class M>
M expm_scaled(const M& x_in, double norm) {
  M x = x_in;
  M u;
  M v;
  int squarings = 0;
  if (norm <= kTheta3) {
    pade_low_degree(x, kPade3, u, v);
  } else if (norm <= kTheta5) {
    pade_low_degree(x, kPade5, u, v);
  } else if (norm <= kTheta7) {
    pade_low_degree(x, kPade7, u, v);
  } else if (norm <= kTheta9) {
    pade_low_degree(x, kPade9, u, v);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    x /= std::ldexp(1.0, squarings);
    pade13(x, u, v);
  }
  M result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = mul(result, result);
  return result;
}

template <int N>
Matrix expm_fixed(const Matrix& x, double norm) {
  using M = Eigen::Matrix<double, N, N>;
  return expm_scaled<M>(M(x), norm);
}

}  // namespace detail

/// e^{a t} by scaling and squaring with a degree-adaptive Pade approximant,
/// applied after a power-of-two balancing similarity when the norm is large.
inline Matrix matrix_exp(const Matrix& a, double t = 1.0) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix_exp: matrix is not square");
  const Eigen::Index n = a.rows();
  if (t == 0.0 || n == 0) return Matrix::Identity(n, n);
  if (!all_finite(a) || !std::isfinite(t)) throw InvalidArgument("matrix_exp: non-finite input");

  Matrix x = a * t;
  if (x.isZero(0.0)) return Matrix::Identity(n, n);
  double norm = detail::norm1(x);
  // Balancing only pays off when it can avoid squarings.
  Vector d = Vector::Ones(n);
  if (norm > detail::kTheta9) {
    d = detail::balance(x);
    norm = detail::norm1(x);
  }

  Matrix e;
  switch (n) {
    case 1: e = detail::expm_fixed<1>(x, norm); break;
    case 2: e = detail::expm_fixed<2>(x, norm); break;
    case 3: e = detail::expm_fixed<3>(x, norm); break;
    case 4: e = detail::expm_fixed<4>(x, norm); break;
    case 5: e = detail::expm_fixed<5>(x, norm); break;
    case 6: e = detail::expm_fixed<6>(x, norm); break;
    case 7: e = detail::expm_fixed<7>(x, norm); break;
    case 8: e = detail::expm_fixed<8>(x, norm); break;
    default: e = detail::expm_scaled<Matrix>(x, norm); break;
  }
  // exp(A) = D exp(D^-1 A D) D^-1
  return d.asDiagonal() * e * d.cwiseInverse().asDiagonal();
}

/// Classical fourth-order Runge-Kutta over [t0, t0 + dt] in `substeps` equal steps.
template <class Deriv>
Vector rk4_propagate(Deriv&& deriv, const Vector& y0, double t0, double dt, int substeps = 1) {
  if (substeps < 1) throw InvalidArgument("rk4_propagate: substeps must be >= 1");
  const double step = dt / substeps;
  const double half = 0.5 * step;

  auto eval = [&](double t, const Vector& y) -> Vector {
    Vector k = deriv(t, y);
    if (k.size() != y.size()) throw DimensionMismatch("rk4_propagate: derivative dimension");
    if (!k.allFinite()) throw IntegrationFailure(t);
    return k;
  };

  Vector y = y0;
  for (int s = 0; s < substeps; ++s) {
    const double t = t0 + s * step;
    const Vector k1 = eval(t, y);
    const Vector k2 = eval(t + half, y + half * k1);
    const Vector k3 = eval(t + half, y + half * k2);
    const Vector k4 = eval(t + step, y + step * k3);
    y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

/// Default central-difference step, 1e-6 * (1 + |y_c|) per component.
inline Vector default_fd_steps(const Vector& y) {
  return 1e-6 * (Vector::Ones(y.size()) + y.cwiseAbs());
}

/// Central-difference Jacobian of func at y with a per-component step.
template <class Func>
Matrix fd_jacobian(Func&& func, const Vector& y, const Vector& steps) {
  if (steps.size() != y.size()) throw DimensionMismatch("fd_jacobian: step dimension");
  if ((steps.array() <= 0.0).any()) throw InvalidArgument("fd_jacobian: steps must be positive");

  Matrix jac;
  Vector probe = y;
  for (Eigen::Index c = 0; c < y.size(); ++c) {
    const double h = steps(c);
    probe(c) = y(c) + h;
    const Vector plus = func(probe);
    probe(c) = y(c) - h;
    const Vector minus = func(probe);
    probe(c) = y(c);
    if (!plus.allFinite() || !minus.allFinite())
      throw NonFiniteEvaluation(static_cast<std::size_t>(c));
    if (c == 0) jac.resize(plus.size(), y.size());
    jac.col(c) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

template <class Func>
Matrix fd_jacobian(Func&& func, const Vector& y) {
  return fd_jacobian(std::forward<Func>(func), y, default_fd_steps(y));
}

}  // namespace spukf
