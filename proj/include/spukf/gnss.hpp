#pragma once

// Low-Earth-orbit receiver positioning from GPS and Galileo pseudoranges. The
// navigation constellations are circular Walker-like shells; the receiver
// moves under two-body gravity with J2-J4 zonal terms and carries one clock
// bias per constellation.

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spukf/scenario.hpp"

namespace spukf {

inline constexpr double kSpeedOfLight = 299792458.0;

struct GravityField {
  double mu = 3.986004418e14;
  double re = 6378137.0;
  double j2 = 1.08263e-3;
  double j3 = -2.532e-6;
  double j4 = -1.61e-6;
};

/// Two-body plus J2, J3, J4 zonal acceleration in an Earth-centred inertial frame.
inline Vector zonal_gravity_accel(const Vector& r, const GravityField& g = {}) {
  if (r.size() != 3) throw DimensionMismatch("zonal_gravity_accel: position must have 3 components");
  const double rn = r.norm();
  if (!(rn > 0.0)) throw InvalidArgument("zonal_gravity_accel: zero radius");
  const double x = r(0), y = r(1), z = r(2);
  const double r2 = rn * rn;
  const double zr2 = z * z / r2;
  const double mu = g.mu, re = g.re;

  Vector a = -mu / (r2 * rn) * r;

  const double r5 = r2 * r2 * rn;
  const double r7 = r5 * r2;
  const double k2 = -1.5 * g.j2 * mu * re * re / r5;
  a(0) += k2 * x * (1.0 - 5.0 * zr2);
  a(1) += k2 * y * (1.0 - 5.0 * zr2);
  a(2) += k2 * z * (3.0 - 5.0 * zr2);

  const double k3 = -2.5 * g.j3 * mu * re * re * re / r7;
  a(0) += k3 * x * (3.0 * z - 7.0 * z * zr2);
  a(1) += k3 * y * (3.0 * z - 7.0 * z * zr2);
  a(2) += k3 * (6.0 * z * z - 7.0 * z * z * zr2 - 0.6 * r2);

  const double k4 = 15.0 / 8.0 * g.j4 * mu * re * re * re * re / r7;
  a(0) += k4 * x * (1.0 - 14.0 * zr2 + 21.0 * zr2 * zr2);
  a(1) += k4 * y * (1.0 - 14.0 * zr2 + 21.0 * zr2 * zr2);
  a(2) += k4 * z * (5.0 - 70.0 / 3.0 * zr2 + 21.0 * zr2 * zr2);
  return a;
}

namespace detail {

// Zonal potential written as a sum of terms c * z^k * r^-p.
struct PotentialTerm {
  double c;
  int k;
  int p;
};

inline std::array<PotentialTerm, 8> zonal_potential_terms(const GravityField& g) {
  const double mu = g.mu;
  const double r2 = g.re * g.re, r3 = r2 * g.re, r4 = r3 * g.re;
  return {{{mu, 0, 1},
           {-mu * g.j2 * r2 * 1.5, 2, 5},
           {mu * g.j2 * r2 * 0.5, 0, 3},
           {-mu * g.j3 * r3 * 2.5, 3, 7},
           {mu * g.j3 * r3 * 1.5, 1, 5},
           {-mu * g.j4 * r4 * 35.0 / 8.0, 4, 9},
           {mu * g.j4 * r4 * 30.0 / 8.0, 2, 7},
           {-mu * g.j4 * r4 * 3.0 / 8.0, 0, 5}}};
}

}  // namespace detail

/// Gravitational potential whose gradient is zonal_gravity_accel.
inline double zonal_potential(const Vector& r, const GravityField& g = {}) {
  const double rn = r.norm();
  double u = 0.0;
  for (const auto& t : detail::zonal_potential_terms(g))
    u += t.c * std::pow(r(2), t.k) * std::pow(rn, -t.p);
  return u;
}

/// Gravity gradient d(accel)/dr, the Hessian of the zonal potential.
inline Matrix zonal_gravity_gradient(const Vector& r, const GravityField& g = {}) {
  const double rn = r.norm();
  if (!(rn > 0.0)) throw InvalidArgument("zonal_gravity_gradient: zero radius");
  const double z = r(2);
  const Eigen::Vector3d x(r(0), r(1), r(2));

  std::array<double, 14> rinv{};  // rinv[p] = r^-p
  rinv[0] = 1.0;
  for (std::size_t i = 1; i < rinv.size(); ++i) rinv[i] = rinv[i - 1] / rn;
  std::array<double, 5> zp{};  // zp[k] = z^k
  zp[0] = 1.0;
  for (std::size_t i = 1; i < zp.size(); ++i) zp[i] = zp[i - 1] * z;

  // Accumulate the coefficients of x x^T, I, (e_z x^T + x e_z^T) and e_z e_z^T.
  double c_xx = 0.0, c_id = 0.0, c_zx = 0.0, c_zz = 0.0;
  for (const auto& t : detail::zonal_potential_terms(g)) {
    const double k = t.k, p = t.p;
    const auto ip = static_cast<std::size_t>(t.p);
    const auto ik = static_cast<std::size_t>(t.k);
    c_xx += t.c * p * (p + 2.0) * zp[ik] * rinv[ip + 4];
    c_id -= t.c * p * zp[ik] * rinv[ip + 2];
    if (t.k >= 1) c_zx -= t.c * p * k * zp[ik - 1] * rinv[ip + 2];
    if (t.k >= 2) c_zz += t.c * k * (k - 1.0) * zp[ik - 2] * rinv[ip];
  }
  Matrix hess = c_xx * x * x.transpose();
  hess.diagonal().array() += c_id;
  hess.col(2) += c_zx * x;
  hess.row(2) += c_zx * x.transpose();
  hess(2, 2) += c_zz;
  return hess;
}

/// Receiver state layout: position (m), velocity (m/s), GPS and Galileo clock biases (s).
struct LeoState {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  double clock_bias_gps = 0.0;
  double clock_bias_gal = 0.0;

  Vector to_vector() const {
    Vector s(8);
    s << r, v, clock_bias_gps, clock_bias_gal;
    return s;
  }
  static LeoState from_vector(const Vector& s) {
    if (s.size() != 8) throw DimensionMismatch("LeoState: expected 8 components");
    LeoState out;
    out.r = s.segment<3>(0);
    out.v = s.segment<3>(3);
    out.clock_bias_gps = s(6);
    out.clock_bias_gal = s(7);
    return out;
  }
};

inline Vector leo_dynamics(const Vector& s, const GravityField& g = {}) {
  if (s.size() != 8) throw DimensionMismatch("leo_dynamics: expected 8 components");
  Vector d = Vector::Zero(8);
  d.segment<3>(0) = s.segment<3>(3);
  d.segment<3>(3) = zonal_gravity_accel(s.head<3>(), g);
  return d;
}

inline Matrix leo_jacobian(const Vector& s, const GravityField& g = {}) {
  Matrix j = Matrix::Zero(8, 8);
  j.block<3, 3>(0, 3).setIdentity();
  j.block<3, 3>(3, 0) = zonal_gravity_gradient(s.head<3>(), g);
  return j;
}

enum class Constellation { gps, galileo };

inline std::string_view to_string(Constellation c) { return c == Constellation::gps ? "gps" : "galileo"; }

struct NavSatellite {
  int id = 0;
  Constellation constellation = Constellation::gps;
  double sma = 26560e3;
  double inclination = 0.0;
  double raan = 0.0;
  double arg_lat0 = 0.0;  // argument of latitude at t = 0
  double clock_bias = 0.0;
};

/// Circular Keplerian position at time t.
inline Eigen::Vector3d satellite_position(const NavSatellite& s, double t, double mu = 3.986004418e14) {
  const double u = s.arg_lat0 + t * std::sqrt(mu / (s.sma * s.sma * s.sma));
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(s.raan), so = std::sin(s.raan);
  const double ci = std::cos(s.inclination), si = std::sin(s.inclination);
  return s.sma * Eigen::Vector3d(co * cu - so * su * ci, so * cu + co * su * ci, su * si);
}

inline std::vector<std::pair<int, Eigen::Vector3d>> propagate_constellation(
    const std::vector<NavSatellite>& sats, double t, double mu = 3.986004418e14) {
  std::vector<std::pair<int, Eigen::Vector3d>> out;
  out.reserve(sats.size());
  for (const auto& s : sats) out.emplace_back(s.id, satellite_position(s, t, mu));
  return out;
}

/// Evenly phased shell: `planes` planes of `per_plane` satellites each.
inline std::vector<NavSatellite> walker_shell(Constellation c, int first_id, int planes, int per_plane,
                                              double sma, double inclination, double phase_step) {
  std::vector<NavSatellite> out;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int p = 0; p < planes; ++p)
    for (int k = 0; k < per_plane; ++k) {
      NavSatellite s;
      s.id = first_id + p * per_plane + k;
      s.constellation = c;
      s.sma = sma;
      s.inclination = inclination;
      s.raan = two_pi * p / planes;
      s.arg_lat0 = two_pi * k / per_plane + phase_step * p;
      out.push_back(s);
    }
  return out;
}

/// 24 GPS satellites (6 planes, 55 deg) and 24 Galileo satellites (3 planes, 56 deg).
inline std::vector<NavSatellite> default_constellations() {
  const double deg = std::numbers::pi / 180.0;
  auto gps = walker_shell(Constellation::gps, 1, 6, 4, 26560e3, 55.0 * deg, 15.0 * deg);
  auto gal = walker_shell(Constellation::galileo, 101, 3, 8, 29600e3, 56.0 * deg, 15.0 * deg);
  gps.insert(gps.end(), gal.begin(), gal.end());
  return gps;
}

struct PseudorangeEntry {
  int sat_id = 0;
  Constellation constellation = Constellation::gps;
  double rho = 0.0;
  Eigen::Vector3d sat_pos = Eigen::Vector3d::Zero();  // at transmission time
  double sat_clock_bias = 0.0;
};

struct PseudorangeSet {
  double epoch = 0.0;
  std::vector<PseudorangeEntry> entries;
};

/// Noise-free pseudorange model for a receiver state vector.
inline double predicted_pseudorange(const Vector& s, const PseudorangeEntry& e) {
  const double bias = e.constellation == Constellation::gps ? s(6) : s(7);
  return (e.sat_pos - s.head<3>()).norm() + kSpeedOfLight * (bias - e.sat_clock_bias);
}

/// Geometric range plus receiver minus satellite clock offset, plus N(0, sigma^2) noise.
template <class Rng>
double pseudorange(const LeoState& leo, const NavSatellite& sat, const Eigen::Vector3d& sat_pos,
                   double noise_sigma, Rng& rng) {
  const double bias = sat.constellation == Constellation::gps ? leo.clock_bias_gps : leo.clock_bias_gal;
  double rho = (sat_pos - leo.r).norm() + kSpeedOfLight * (bias - sat.clock_bias);
  if (noise_sigma > 0.0) rho += std::normal_distribution<double>(0.0, noise_sigma)(rng);
  return rho;
}

/// Satellite position at the transmission time of a signal received at (t, receiver).
inline Eigen::Vector3d transmit_position(const NavSatellite& s, double t, const Eigen::Vector3d& receiver,
                                         double mu = 3.986004418e14) {
  Eigen::Vector3d pos = satellite_position(s, t, mu);
  for (int it = 0; it < 3; ++it) {
    const double tau = (pos - receiver).norm() / kSpeedOfLight;
    pos = satellite_position(s, t - tau, mu);
  }
  return pos;
}

inline double elevation(const Eigen::Vector3d& receiver, const Eigen::Vector3d& sat) {
  const Eigen::Vector3d los = (sat - receiver).normalized();
  return std::asin(std::clamp(los.dot(receiver.normalized()), -1.0, 1.0));
}

struct LsFix {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double clock_bias_gps = 0.0;
  double clock_bias_gal = 0.0;
  int iterations = 0;
};

/// Gauss-Newton point solution for position and both receiver clock biases.
inline LsFix least_squares_fix(const PseudorangeSet& prs, const Eigen::Vector3d& initial = Eigen::Vector3d::Zero()) {
  const auto m = static_cast<Eigen::Index>(prs.entries.size());
  if (m < 5) throw SingularGeometry("least_squares_fix: need at least 5 pseudoranges");
  Eigen::Matrix<double, 5, 1> x;
  x << initial, 0.0, 0.0;  // biases in metres while iterating
  Matrix h(m, 5);
  Vector res(m);
  for (int iter = 1; iter <= 20; ++iter) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& e = prs.entries[static_cast<std::size_t>(i)];
      const Eigen::Vector3d d = e.sat_pos - x.head<3>();
      const double range = d.norm();
      const bool gps = e.constellation == Constellation::gps;
      h.row(i) << -d.transpose() / range, gps ? 1.0 : 0.0, gps ? 0.0 : 1.0;
      res(i) = e.rho + kSpeedOfLight * e.sat_clock_bias - range - (gps ? x(3) : x(4));
    }
    const Matrix normal = h.transpose() * h;
    const Eigen::JacobiSVD<Matrix> svd(normal);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(4);
    if (!(smin > 0.0) || smax / smin > 1e12)
      throw SingularGeometry("least_squares_fix: normal matrix is ill-conditioned");
    const Vector step = normal.ldlt().solve(h.transpose() * res);
    x += step;
    if (step.norm() < 1e-4) {
      LsFix fix;
      fix.position = x.head<3>();
      fix.clock_bias_gps = x(3) / kSpeedOfLight;
      fix.clock_bias_gal = x(4) / kSpeedOfLight;
      fix.iterations = iter;
      return fix;
    }
  }
  throw NonConvergence("least_squares_fix: no convergence after 20 iterations");
}

struct GnssConfig {
  GravityField gravity;
  double leo_sma = 6378137.0 + 700e3;
  double leo_inclination = 51.6 * std::numbers::pi / 180.0;
  double leo_raan = 0.3;
  double leo_arg_lat0 = 0.0;
  double clock_bias_gps0 = 1e-4;
  double clock_bias_gal0 = 1e-4 + 3e-8;
  double sat_clock_sigma = 1e-5;  // spread of navigation-satellite clock biases (s)
  double pr_sigma = 3.0;
  double elevation_mask_deg = 5.0;
  double dt = 1.0;
  double duration = 7200.0;
  int substeps = 2;
  int truth_substeps = 10;
  // Per-step process noise standard deviations, shared by truth and filters.
  double q_pos_sigma = 1e-3;
  double q_vel_sigma = 1e-3;
  double q_clock_sigma = 1e-10;
  // Initial covariance standard deviations.
  double p0_pos_sigma = 10.0;
  double p0_vel_sigma = 10.0;
  double p0_clock_sigma = 1e-7;
  double steady_start = 100.0;
};

inline void validate(const GnssConfig& c) {
  if (!(c.leo_sma > c.gravity.re)) throw ConfigError("gnss: LEO orbit below the Earth's surface");
  if (!(c.dt > 0.0) || !(c.duration >= c.dt)) throw ConfigError("gnss: need dt > 0 and duration >= dt");
  if (c.substeps < 1 || c.truth_substeps < 1) throw ConfigError("gnss: substeps must be >= 1");
  for (double v : {c.pr_sigma, c.q_pos_sigma, c.q_vel_sigma, c.q_clock_sigma, c.sat_clock_sigma})
    if (!(v >= 0.0)) throw ConfigError("gnss: noise levels must be non-negative");
  for (double v : {c.p0_pos_sigma, c.p0_vel_sigma, c.p0_clock_sigma})
    if (!(v > 0.0)) throw ConfigError("gnss: initial standard deviations must be positive");
}

inline Matrix gnss_process_noise(const GnssConfig& c) {
  Vector d(8);
  d << Vector::Constant(3, c.q_pos_sigma * c.q_pos_sigma), Vector::Constant(3, c.q_vel_sigma * c.q_vel_sigma),
      Vector::Constant(2, c.q_clock_sigma * c.q_clock_sigma);
  return d.asDiagonal();
}

inline DynamicsModel leo_dynamics_model(const GnssConfig& c) {
  DynamicsModel m;
  m.state_dim = 8;
  const GravityField g = c.gravity;
  m.deriv = [g](double, const Vector& y) { return leo_dynamics(y, g); };
  m.jacobian = [g](double, const Vector& y) { return leo_jacobian(y, g); };
  m.process_noise = gnss_process_noise(c);
  return m;
}

/// Pseudorange measurement model for one epoch's set of tracked satellites.
inline MeasurementModel pseudorange_model(const PseudorangeSet& prs, double sigma) {
  MeasurementModel m;
  m.meas_dim = static_cast<int>(prs.entries.size());
  auto entries = std::make_shared<const std::vector<PseudorangeEntry>>(prs.entries);
  m.h = [entries](const Vector& y) {
    Vector z(static_cast<Eigen::Index>(entries->size()));
    for (std::size_t i = 0; i < entries->size(); ++i)
      z(static_cast<Eigen::Index>(i)) = predicted_pseudorange(y, (*entries)[i]);
    return z;
  };
  m.h_jacobian = [entries](const Vector& y) {
    Matrix j = Matrix::Zero(static_cast<Eigen::Index>(entries->size()), 8);
    for (std::size_t i = 0; i < entries->size(); ++i) {
      const auto& e = (*entries)[i];
      const auto row = static_cast<Eigen::Index>(i);
      j.block<1, 3>(row, 0) = -(e.sat_pos - y.head<3>()).normalized().transpose();
      j(row, e.constellation == Constellation::gps ? 6 : 7) = kSpeedOfLight;
    }
    return j;
  };
  m.meas_noise = sigma * sigma * Matrix::Identity(m.meas_dim, m.meas_dim);
  return m;
}

inline LeoState initial_leo_state(const GnssConfig& c) {
  NavSatellite orbit;
  orbit.sma = c.leo_sma;
  orbit.inclination = c.leo_inclination;
  orbit.raan = c.leo_raan;
  orbit.arg_lat0 = c.leo_arg_lat0;
  LeoState s;
  s.r = satellite_position(orbit, 0.0, c.gravity.mu);
  // Velocity of the circular orbit: derivative of the position along the argument of latitude.
  const double h = 1e-3;
  s.v = (satellite_position(orbit, h, c.gravity.mu) - satellite_position(orbit, -h, c.gravity.mu)) / (2.0 * h);
  s.clock_bias_gps = c.clock_bias_gps0;
  s.clock_bias_gal = c.clock_bias_gal0;
  return s;
}

struct GnssTruth {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<PseudorangeSet> measurements;
  std::vector<NavSatellite> satellites;
};

/// Truth trajectory with per-step N(0, Q) forcing and the visible satellites' pseudoranges.
inline GnssTruth simulate_gnss_truth(const GnssConfig& c, std::uint64_t seed) {
  validate(c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  GnssTruth out;
  out.satellites = default_constellations();
  for (auto& s : out.satellites) s.clock_bias = c.sat_clock_sigma * normal(rng);

  const Matrix q_root = gnss_process_noise(c).cwiseSqrt();
  const GravityField g = c.gravity;
  auto f = [g](double, const Vector& y) { return leo_dynamics(y, g); };
  const double mask = c.elevation_mask_deg * std::numbers::pi / 180.0;
  const auto n_steps = static_cast<std::size_t>(std::llround(c.duration / c.dt));

  Vector x = initial_leo_state(c).to_vector();
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * c.dt;
    if (k > 0) {
      x = rk4_propagate(f, x, t - c.dt, c.dt, c.truth_substeps);
      Vector w(8);
      for (int i = 0; i < 8; ++i) w(i) = normal(rng);
      x += q_root * w;
    }
    const LeoState leo = LeoState::from_vector(x);
    PseudorangeSet prs;
    prs.epoch = t;
    for (const auto& sat : out.satellites) {
      const Eigen::Vector3d pos = transmit_position(sat, t, leo.r, g.mu);
      if (elevation(leo.r, pos) < mask) continue;
      PseudorangeEntry e;
      e.sat_id = sat.id;
      e.constellation = sat.constellation;
      e.sat_pos = pos;
      e.sat_clock_bias = sat.clock_bias;
      e.rho = pseudorange(leo, sat, pos, c.pr_sigma, rng);
      prs.entries.push_back(e);
    }
    out.times.push_back(t);
    out.states.push_back(x);
    out.measurements.push_back(std::move(prs));
  }
  return out;
}

inline ScenarioData make_gnss_scenario(const GnssConfig& c, std::uint64_t seed) {
  auto truth = simulate_gnss_truth(c, seed);
  ScenarioData s;
  s.name = "leo-gnss";
  s.dyn = leo_dynamics_model(c);
  s.times = truth.times;
  s.truth = truth.states;
  s.meas.reserve(truth.measurements.size());
  s.z.reserve(truth.measurements.size());
  for (const auto& prs : truth.measurements) {
    s.meas.push_back(pseudorange_model(prs, c.pr_sigma));
    Vector z(static_cast<Eigen::Index>(prs.entries.size()));
    for (std::size_t i = 0; i < prs.entries.size(); ++i) z(static_cast<Eigen::Index>(i)) = prs.entries[i].rho;
    s.z.push_back(z);
  }

  // Position and clocks from the first epoch's point solution, velocity from
  // the difference of the first two.
  const LsFix f0 = least_squares_fix(truth.measurements.at(0));
  const LsFix f1 = least_squares_fix(truth.measurements.at(1), f0.position);
  LeoState init;
  init.r = f0.position;
  init.v = (f1.position - f0.position) / (truth.times[1] - truth.times[0]);
  init.clock_bias_gps = f0.clock_bias_gps;
  init.clock_bias_gal = f0.clock_bias_gal;
  Vector p0(8);
  p0 << Vector::Constant(3, c.p0_pos_sigma * c.p0_pos_sigma), Vector::Constant(3, c.p0_vel_sigma * c.p0_vel_sigma),
      Vector::Constant(2, c.p0_clock_sigma * c.p0_clock_sigma);
  s.initial = StateEstimate{truth.times[0], init.to_vector(), p0.asDiagonal()};
  s.filter_cfg.substeps = c.substeps;
  s.steady_start = c.steady_start;
  s.steady_end = c.duration;
  s.error_labels = {"x", "y", "z", "vx", "vy", "vz", "clock_gps", "clock_gal"};
  s.metric = [](const Vector& err) { return err.head<3>().norm(); };
  return s;
}

}  // namespace spukf
