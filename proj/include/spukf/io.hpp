#pragma once

// JSON scenario configuration and the CSV / JSON result tables written by the
// command-line tool.

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spukf/complexity.hpp"
#include "spukf/gnss.hpp"
#include "spukf/harness.hpp"
#include "spukf/reentry.hpp"

namespace spukf {

using json = nlohmann::json;

namespace detail {

inline json to_json_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json_vector(m.row(i).transpose()));
  return rows;
}

inline Vector vector_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string(key) + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(key) + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const json& j, const char* key) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(key) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(i)], key);
    if (row.size() != cols) throw ConfigError(std::string(key) + ": ragged rows");
    m.row(i) = row.transpose();
  }
  return m;
}

inline void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError(std::string(what) + ": unknown key '" + item.key() + "'");
}

template <class T>
void read_number(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + ": expected a number");
  out = j[key].get<T>();
}

}  // namespace detail

inline json to_json(const ReentryConfig& c) {
  using namespace detail;
  return {{"lambda_coeff", c.lambda_coeff},
          {"radar_altitude", c.radar_altitude},
          {"radar_offset", c.radar_offset},
          {"true_initial_state", to_json_vector(c.true_initial_state)},
          {"init_estimate", to_json_vector(c.init_estimate)},
          {"init_cov", to_json_matrix(c.init_cov)},
          {"process_q", to_json_matrix(c.process_q)},
          {"meas_variance", c.meas_variance},
          {"dt", c.dt},
          {"duration", c.duration},
          {"substeps", c.substeps},
          {"truth_substeps", c.truth_substeps},
          {"steady_start", c.steady_start},
          {"steady_end", c.steady_end}};
}

/// Keys absent from `j` keep their default values; unknown keys are rejected.
inline ReentryConfig reentry_config_from_json(const json& j) {
  using namespace detail;
  reject_unknown(j,
                 {"lambda_coeff", "radar_altitude", "radar_offset", "true_initial_state", "init_estimate",
                  "init_cov", "process_q", "meas_variance", "dt", "duration", "substeps", "truth_substeps",
                  "steady_start", "steady_end"},
                 "reentry config");
  ReentryConfig c;
  read_number(j, "lambda_coeff", c.lambda_coeff);
  read_number(j, "radar_altitude", c.radar_altitude);
  read_number(j, "radar_offset", c.radar_offset);
  if (j.contains("true_initial_state")) c.true_initial_state = vector_from_json(j["true_initial_state"], "true_initial_state");
  if (j.contains("init_estimate")) c.init_estimate = vector_from_json(j["init_estimate"], "init_estimate");
  if (j.contains("init_cov")) c.init_cov = matrix_from_json(j["init_cov"], "init_cov");
  if (j.contains("process_q")) c.process_q = matrix_from_json(j["process_q"], "process_q");
  read_number(j, "meas_variance", c.meas_variance);
  read_number(j, "dt", c.dt);
  read_number(j, "duration", c.duration);
  read_number(j, "substeps", c.substeps);
  read_number(j, "truth_substeps", c.truth_substeps);
  read_number(j, "steady_start", c.steady_start);
  read_number(j, "steady_end", c.steady_end);
  validate(c);
  return c;
}

inline json to_json(const GnssConfig& c) {
  return {{"gravity", {{"mu", c.gravity.mu}, {"re", c.gravity.re}, {"j2", c.gravity.j2}, {"j3", c.gravity.j3}, {"j4", c.gravity.j4}}},
          {"leo_sma", c.leo_sma},
          {"leo_inclination", c.leo_inclination},
          {"leo_raan", c.leo_raan},
          {"leo_arg_lat0", c.leo_arg_lat0},
          {"clock_bias_gps0", c.clock_bias_gps0},
          {"clock_bias_gal0", c.clock_bias_gal0},
          {"sat_clock_sigma", c.sat_clock_sigma},
          {"pr_sigma", c.pr_sigma},
          {"elevation_mask_deg", c.elevation_mask_deg},
          {"dt", c.dt},
          {"duration", c.duration},
          {"substeps", c.substeps},
          {"truth_substeps", c.truth_substeps},
          {"q_pos_sigma", c.q_pos_sigma},
          {"q_vel_sigma", c.q_vel_sigma},
          {"q_clock_sigma", c.q_clock_sigma},
          {"p0_pos_sigma", c.p0_pos_sigma},
          {"p0_vel_sigma", c.p0_vel_sigma},
          {"p0_clock_sigma", c.p0_clock_sigma},
          {"steady_start", c.steady_start}};
}

inline GnssConfig gnss_config_from_json(const json& j) {
  using namespace detail;
  reject_unknown(j,
                 {"gravity", "leo_sma", "leo_inclination", "leo_raan", "leo_arg_lat0", "clock_bias_gps0",
                  "clock_bias_gal0", "sat_clock_sigma", "pr_sigma", "elevation_mask_deg", "dt", "duration",
                  "substeps", "truth_substeps", "q_pos_sigma", "q_vel_sigma", "q_clock_sigma", "p0_pos_sigma",
                  "p0_vel_sigma", "p0_clock_sigma", "steady_start"},
                 "gnss config");
  GnssConfig c;
  if (j.contains("gravity")) {
    const json& g = j["gravity"];
    reject_unknown(g, {"mu", "re", "j2", "j3", "j4"}, "gravity");
    read_number(g, "mu", c.gravity.mu);
    read_number(g, "re", c.gravity.re);
    read_number(g, "j2", c.gravity.j2);
    read_number(g, "j3", c.gravity.j3);
    read_number(g, "j4", c.gravity.j4);
  }
  read_number(j, "leo_sma", c.leo_sma);
  read_number(j, "leo_inclination", c.leo_inclination);
  read_number(j, "leo_raan", c.leo_raan);
  read_number(j, "leo_arg_lat0", c.leo_arg_lat0);
  read_number(j, "clock_bias_gps0", c.clock_bias_gps0);
  read_number(j, "clock_bias_gal0", c.clock_bias_gal0);
  read_number(j, "sat_clock_sigma", c.sat_clock_sigma);
  read_number(j, "pr_sigma", c.pr_sigma);
  read_number(j, "elevation_mask_deg", c.elevation_mask_deg);
  read_number(j, "dt", c.dt);
  read_number(j, "duration", c.duration);
  read_number(j, "substeps", c.substeps);
  read_number(j, "truth_substeps", c.truth_substeps);
  read_number(j, "q_pos_sigma", c.q_pos_sigma);
  read_number(j, "q_vel_sigma", c.q_vel_sigma);
  read_number(j, "q_clock_sigma", c.q_clock_sigma);
  read_number(j, "p0_pos_sigma", c.p0_pos_sigma);
  read_number(j, "p0_vel_sigma", c.p0_vel_sigma);
  read_number(j, "p0_clock_sigma", c.p0_clock_sigma);
  read_number(j, "steady_start", c.steady_start);
  validate(c);
  return c;
}

inline json to_json(const FilterConfig& c) {
  json j = {{"substeps", c.substeps},
            {"simplex_w0", c.simplex_w0},
            {"jacobian_mode", c.jacobian_mode == JacobianMode::analytic ? "analytic" : "finite_difference"},
            {"redraw_for_measurement", c.redraw_for_measurement}};
  if (c.kappa) j["kappa"] = *c.kappa;
  return j;
}

inline FilterConfig filter_config_from_json(const json& j, FilterConfig base = {}) {
  detail::reject_unknown(j, {"kappa", "substeps", "simplex_w0", "jacobian_mode", "redraw_for_measurement"},
                         "filter config");
  if (j.contains("kappa")) {
    double k = 0.0;
    detail::read_number(j, "kappa", k);
    base.kappa = k;
  }
  detail::read_number(j, "substeps", base.substeps);
  detail::read_number(j, "simplex_w0", base.simplex_w0);
  if (j.contains("redraw_for_measurement")) {
    if (!j["redraw_for_measurement"].is_boolean()) throw ConfigError("redraw_for_measurement: expected a boolean");
    base.redraw_for_measurement = j["redraw_for_measurement"].get<bool>();
  }
  if (j.contains("jacobian_mode")) {
    const auto mode = j["jacobian_mode"].get<std::string>();
    if (mode == "analytic") base.jacobian_mode = JacobianMode::analytic;
    else if (mode == "finite_difference") base.jacobian_mode = JacobianMode::finite_difference;
    else throw ConfigError("jacobian_mode: expected 'analytic' or 'finite_difference'");
  }
  return base;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace detail {

// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  auto out = detail::open_out(path);
  out << "filter,mean_err,std_err,mean_step_ns,reduction_pct\n";
  for (const auto& r : rows)
    out << r.filter << ',' << detail::fmt(r.mean_err) << ',' << detail::fmt(r.std_err) << ','
        << detail::fmt(r.mean_step_ns) << ',' << detail::fmt(r.reduction_pct) << '\n';
}

inline std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "filter,mean_err,std_err,mean_step_ns,reduction_pct") throw Error("unexpected summary header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    if (cells.size() != 5) throw Error("malformed summary row: " + line);
    SummaryRow r;
    r.filter = cells[0];
    r.mean_err = std::strtod(cells[1].c_str(), nullptr);
    r.std_err = std::strtod(cells[2].c_str(), nullptr);
    r.mean_step_ns = std::strtod(cells[3].c_str(), nullptr);
    r.reduction_pct = std::strtod(cells[4].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

inline void write_errors_csv(const std::filesystem::path& path, const RunResult& r,
                             const std::vector<std::string>& labels) {
  auto out = detail::open_out(path);
  out << 't';
  for (const auto& l : labels) out << ",err_" << l;
  out << ",norm\n";
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    out << detail::fmt(r.t[i]);
    for (Eigen::Index c = 0; c < r.errors[i].size(); ++c) out << ',' << detail::fmt(r.errors[i](c));
    out << ',' << detail::fmt(r.norm[i]) << '\n';
  }
}

inline void write_timing_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs) {
  auto out = detail::open_out(path);
  out << "filter,seed,steps,mean_step_ns,median_step_ns\n";
  for (const auto& r : runs)
    out << r.filter << ',' << r.seed << ',' << r.step_ns.size() << ',' << detail::fmt(r.mean_step_ns) << ','
        << detail::fmt(r.median_step_ns) << '\n';
}

inline json summary_json(const std::string& scenario, const CampaignResult& res) {
  json j;
  j["scenario"] = scenario;
  j["filters"] = json::array();
  for (const auto& r : res.summary)
    j["filters"].push_back({{"filter", r.filter},
                            {"mean_err", r.mean_err},
                            {"std_err", r.std_err},
                            {"mean_step_ns", r.mean_step_ns},
                            {"median_step_ns", r.median_step_ns},
                            {"reduction_pct", r.reduction_pct},
                            {"runs", r.runs},
                            {"diverged", r.diverged}});
  j["runs"] = json::array();
  for (const auto& r : res.runs)
    j["runs"].push_back({{"filter", r.filter},
                         {"seed", r.seed},
                         {"mean_steady_error", r.mean_steady_error},
                         {"mean_step_ns", r.mean_step_ns},
                         {"diverged", r.diverged},
                         {"failure", r.failure}});
  return j;
}

/// Writes summary.csv, timing.csv, summary.json and one errors_<filter>_<seed>.csv per run.
inline void write_campaign(const std::filesystem::path& dir, const std::string& scenario,
                           const CampaignResult& res, const std::vector<std::string>& labels) {
  std::filesystem::create_directories(dir);
  write_summary_csv(dir / "summary.csv", res.summary);
  write_timing_csv(dir / "timing.csv", res.runs);
  for (const auto& r : res.runs)
    write_errors_csv(dir / ("errors_" + r.filter + "_" + std::to_string(r.seed) + ".csv"), r, labels);
  auto out = detail::open_out(dir / "summary.json");
  out << summary_json(scenario, res).dump(2) << '\n';
}

/// Truth and measurements, one row per epoch; short measurement rows are padded with empty cells.
inline void write_truth_csv(const std::filesystem::path& path, const ScenarioData& s) {
  auto out = detail::open_out(path);
  Eigen::Index max_m = 0;
  for (const auto& z : s.z) max_m = std::max(max_m, z.size());
  out << 't';
  for (const auto& l : s.error_labels) out << ',' << l;
  for (Eigen::Index i = 0; i < max_m; ++i) out << ",z" << i;
  out << '\n';
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    out << detail::fmt(s.times[k]);
    for (Eigen::Index c = 0; c < s.truth[k].size(); ++c) out << ',' << detail::fmt(s.truth[k](c));
    for (Eigen::Index i = 0; i < max_m; ++i) {
      out << ',';
      if (i < s.z[k].size()) out << detail::fmt(s.z[k](i));
    }
    out << '\n';
  }
}

struct ComplexityRow {
  CostAlgo algo;
  int n, j, h;
  double cost_bound;
  double reduction_percent;
};

struct LimitRow {
  CostAlgo algo;
  int j, h;
  double limit;
};

struct ComplexityGrid {
  std::vector<ComplexityRow> rows;
  std::vector<LimitRow> limits;
};

/// Evaluates the cost model for every algorithm over n = 1..n_max and the given j and h values.
inline ComplexityGrid complexity_grid(int n_max, const std::vector<int>& js, const std::vector<int>& hs) {
  if (n_max < 1 || js.empty() || hs.empty()) throw ConfigError("complexity grid: empty range");
  ComplexityGrid g;
  for (CostAlgo a : {CostAlgo::ukf, CostAlgo::spukf, CostAlgo::espukf})
    for (int j : js)
      for (int h : hs) {
        for (int n = 1; n <= n_max; ++n) {
          const CostModelParams p{n, j, h};
          g.rows.push_back({a, n, j, h, cost_bound(a, p), reduction_percent(a, p)});
        }
        if (a != CostAlgo::ukf) g.limits.push_back({a, j, h, state_dim_limit(a, j, h)});
      }
  return g;
}

inline void write_complexity_csv(const std::filesystem::path& path, const ComplexityGrid& g) {
  auto out = detail::open_out(path);
  out << "algo,n,j,h,cost_bound,reduction_percent\n";
  for (const auto& r : g.rows)
    out << to_string(r.algo) << ',' << r.n << ',' << r.j << ',' << r.h << ',' << detail::fmt(r.cost_bound) << ','
        << detail::fmt(r.reduction_percent) << '\n';
  std::filesystem::path limits = path;
  limits.replace_filename(path.stem().string() + "_limits.csv");
  auto lout = detail::open_out(limits);
  lout << "algo,j,h,state_dim_limit\n";
  for (const auto& l : g.limits)
    lout << to_string(l.algo) << ',' << l.j << ',' << l.h << ',' << detail::fmt(l.limit) << '\n';
}

}  // namespace spukf
