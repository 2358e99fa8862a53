#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "spukf/io.hpp"

using namespace spukf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spukf_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Io, NumberFormatRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(detail::fmt(v)), v);
  }
  EXPECT_EQ(detail::fmt(0.1), "0.1");
  EXPECT_EQ(detail::fmt(1.0 / 3.0), "0.3333333333333333");
}

TEST(Io, SummaryCsvRoundTrip) {
  const fs::path dir = temp_dir("summary");
  std::vector<SummaryRow> rows(3);
  rows[0] = {"ekf", 0.1, 1.0 / 3.0, 12345.678901234567, -7.25, 0.0, 0, 0};
  rows[1] = {"ukf", 4.596123456789, 1e-300, 98765.4321, 0.0, 0.0, 0, 0};
  rows[2] = {"spukf", 19.68, 2.5, std::nextafter(1000.0, 2000.0), 72.400000000000006, 0.0, 0, 0};
  write_summary_csv(dir / "s.csv", rows);
  EXPECT_EQ(read_lines(dir / "s.csv").front(), "filter,mean_err,std_err,mean_step_ns,reduction_pct");
  const auto back = read_summary_csv(dir / "s.csv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].filter, rows[i].filter);
    EXPECT_EQ(back[i].mean_err, rows[i].mean_err);
    EXPECT_EQ(back[i].std_err, rows[i].std_err);
    EXPECT_EQ(back[i].mean_step_ns, rows[i].mean_step_ns);
    EXPECT_EQ(back[i].reduction_pct, rows[i].reduction_pct);
  }
}

TEST(Io, ReentryConfigRoundTrip) {
  ReentryConfig c;
  c.dt = 0.1;
  c.substeps = 7;
  c.init_cov(0, 0) = 1.0 / 3.0;
  c.process_q = 1e-7 * Matrix::Identity(3, 3);
  c.true_initial_state(2) = 0.0011;
  const auto back = reentry_config_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(back.dt, c.dt);
  EXPECT_EQ(back.substeps, c.substeps);
  EXPECT_EQ(back.init_cov, c.init_cov);
  EXPECT_EQ(back.process_q, c.process_q);
  EXPECT_EQ(back.true_initial_state, c.true_initial_state);
  EXPECT_EQ(back.init_estimate, c.init_estimate);
  EXPECT_EQ(back.meas_variance, c.meas_variance);
  EXPECT_EQ(back.steady_start, c.steady_start);
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Io, PartialConfigKeepsDefaults) {
  const auto c = reentry_config_from_json(json{{"dt", 0.25}});
  EXPECT_EQ(c.dt, 0.25);
  EXPECT_EQ(c.duration, ReentryConfig{}.duration);
  const auto g = gnss_config_from_json(json{{"gravity", {{"j3", 0.0}}}});
  EXPECT_EQ(g.gravity.j3, 0.0);
  EXPECT_EQ(g.gravity.j2, GravityField{}.j2);
}

TEST(Io, GnssConfigRoundTrip) {
  GnssConfig c;
  c.pr_sigma = 2.5;
  c.duration = 123.0;
  c.gravity.j4 = 0.0;
  c.leo_inclination = 0.9;
  const auto back = gnss_config_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.gravity.j4, 0.0);
  EXPECT_EQ(back.pr_sigma, 2.5);
}

TEST(Io, FilterConfigRoundTrip) {
  FilterConfig f;
  f.kappa = 0.5;
  f.substeps = 9;
  f.simplex_w0 = 0.3;
  f.jacobian_mode = JacobianMode::finite_difference;
  f.redraw_for_measurement = false;
  const auto back = filter_config_from_json(json::parse(to_json(f).dump()));
  EXPECT_EQ(back.kappa, f.kappa);
  EXPECT_EQ(back.substeps, 9);
  EXPECT_EQ(back.simplex_w0, 0.3);
  EXPECT_EQ(back.jacobian_mode, JacobianMode::finite_difference);
  EXPECT_FALSE(back.redraw_for_measurement);
  EXPECT_FALSE(filter_config_from_json(json::object()).kappa.has_value());
}

TEST(Io, InvalidConfigsRejected) {
  EXPECT_THROW(reentry_config_from_json(json{{"dtt", 0.5}}), ConfigError);
  EXPECT_THROW(reentry_config_from_json(json{{"dt", "fast"}}), ConfigError);
  EXPECT_THROW(reentry_config_from_json(json{{"dt", -1.0}}), ConfigError);
  EXPECT_THROW(reentry_config_from_json(json{{"init_cov", {1.0, 2.0}}}), ConfigError);
  EXPECT_THROW(gnss_config_from_json(json{{"gravity", {{"j5", 1.0}}}}), ConfigError);
  EXPECT_THROW(filter_config_from_json(json{{"jacobian_mode", "numeric"}}), ConfigError);
  EXPECT_THROW(filter_config_from_json(json{{"redraw_for_measurement", 1}}), ConfigError);
  EXPECT_THROW(read_json_file("/nonexistent/spukf.json"), ConfigError);

  const fs::path dir = temp_dir("badjson");
  std::ofstream(dir / "bad.json") << "{\"dt\": ";
  EXPECT_THROW(read_json_file(dir / "bad.json"), ConfigError);
}

TEST(Io, ComplexityGrid) {
  const auto g = complexity_grid(10, {1, 10}, {1, 2, 5});
  EXPECT_EQ(g.rows.size(), 3u * 2 * 3 * 10);
  EXPECT_EQ(g.limits.size(), 2u * 2 * 3);
  for (const auto& r : g.rows)
    if (r.algo == CostAlgo::ukf) {
      EXPECT_EQ(r.reduction_percent, 0.0);
    }
  EXPECT_THROW(complexity_grid(0, {1}, {1}), ConfigError);
  EXPECT_THROW(complexity_grid(5, {}, {1}), ConfigError);

  const fs::path dir = temp_dir("complexity");
  write_complexity_csv(dir / "grid.csv", g);
  const auto lines = read_lines(dir / "grid.csv");
  EXPECT_EQ(lines.front(), "algo,n,j,h,cost_bound,reduction_percent");
  EXPECT_EQ(lines.size(), g.rows.size() + 1);
  const auto limits = read_lines(dir / "grid_limits.csv");
  EXPECT_EQ(limits.front(), "algo,j,h,state_dim_limit");
  EXPECT_EQ(limits.size(), g.limits.size() + 1);
}

TEST(Io, CampaignFiles) {
  CampaignResult res;
  RunResult r;
  r.filter = "ukf";
  r.seed = 3;
  r.t = {0.5, 1.0};
  r.errors = {Vector{{1.0, 2.0}}, Vector{{-1.0, 0.5}}};
  r.norm = {std::sqrt(5.0), std::sqrt(1.25)};
  r.mean_step_ns = 10.0;
  res.runs = {r};
  res.summary = summarize({FilterKind::ukf}, res.runs);
  const fs::path dir = temp_dir("campaign");
  write_campaign(dir, "toy", res, {"a", "b"});
  for (const char* f : {"summary.csv", "timing.csv", "summary.json", "errors_ukf_3.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto err_lines = read_lines(dir / "errors_ukf_3.csv");
  ASSERT_EQ(err_lines.size(), 3u);
  EXPECT_EQ(err_lines[0], "t,err_a,err_b,norm");
  EXPECT_EQ(err_lines[1].substr(0, 8), "0.5,1,2,");
  const auto j = read_json_file(dir / "summary.json");
  EXPECT_EQ(j["scenario"], "toy");
  EXPECT_EQ(j["filters"][0]["reduction_pct"], 0.0);
}
