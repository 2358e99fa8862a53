#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "spukf/io.hpp"
#include "spukf/probes.hpp"

namespace spukf::cli {
namespace {

struct RunArgs {
  std::string scenario = "reentry";
  std::string filters = "ekf,ukf,ssukf,spukf,espukf";
  int seeds = 1;
  std::uint64_t first_seed = 1;
  std::size_t steps = 0;
  std::size_t warmup = 10;
  int substeps = 0;
  std::string out_dir;
  std::string config;
  bool sequential = false;
  bool export_truth = false;
};

std::vector<FilterKind> parse_filters(const std::string& list) {
  std::vector<FilterKind> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    try {
      out.push_back(parse_filter_kind(name));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) throw ConfigError("no filters selected");
  return out;
}

std::string check_scenario(const std::string& s) {
  if (s != "reentry" && s != "leo-gnss") throw ConfigError("unknown scenario '" + s + "'");
  return s;
}

// Scenario keys at the top level of the file, filter settings under "filter".
struct LoadedConfig {
  ReentryConfig reentry;
  GnssConfig gnss;
  FilterConfig filter;
};

LoadedConfig load_config(const std::string& scenario, const std::string& path) {
  LoadedConfig c;
  json j = json::object();
  if (!path.empty()) j = read_json_file(path);
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  json filter = json::object();
  if (j.contains("filter")) {
    filter = j["filter"];
    j.erase("filter");
  }
  if (scenario == "reentry") {
    c.reentry = reentry_config_from_json(j);
    c.filter.substeps = c.reentry.substeps;
  } else {
    c.gnss = gnss_config_from_json(j);
    c.filter.substeps = c.gnss.substeps;
  }
  c.filter = filter_config_from_json(filter, c.filter);
  return c;
}

void print_summary(std::ostream& out, const CampaignResult& res) {
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %14s %14s %14s %14s %10s %6s\n", "filter", "mean_err", "std_err",
                "mean_step_ns", "median_ns", "reduction%", "div");
  out << line;
  for (const auto& r : res.summary) {
    std::snprintf(line, sizeof line, "%-8s %14.6g %14.6g %14.1f %14.1f %10.2f %6zu\n", r.filter.c_str(), r.mean_err,
                  r.std_err, r.mean_step_ns, r.median_step_ns, r.reduction_pct, r.diverged);
    out << line;
  }
  for (const auto& r : res.runs)
    if (r.diverged) out << "diverged: " << r.filter << " seed " << r.seed << " (" << r.failure << ")\n";
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const std::string scenario = check_scenario(a.scenario);
  if (a.seeds < 1) throw ConfigError("--seeds must be at least 1");
  const LoadedConfig cfg = load_config(scenario, a.config);

  CampaignConfig camp;
  camp.scenario = scenario;
  camp.filters = parse_filters(a.filters);
  camp.seeds.clear();
  for (int i = 0; i < a.seeds; ++i) camp.seeds.push_back(a.first_seed + static_cast<std::uint64_t>(i));
  camp.warmup_steps = a.warmup;
  camp.max_steps = a.steps;
  camp.sequential = a.sequential;
  camp.output_dir = a.out_dir;
  camp.filter_cfg = cfg.filter;
  if (a.substeps > 0) camp.filter_cfg->substeps = a.substeps;

  ScenarioFactory factory;
  if (scenario == "reentry") factory = [c = cfg.reentry](std::uint64_t seed) { return make_reentry_scenario(c, seed); };
  else factory = [c = cfg.gnss](std::uint64_t seed) { return make_gnss_scenario(c, seed); };

  const CampaignResult res = monte_carlo(camp, factory);
  const ScenarioData first = factory(camp.seeds.front());
  write_campaign(a.out_dir, scenario, res, first.error_labels);
  if (a.export_truth)
    for (auto seed : camp.seeds)
      write_truth_csv(std::filesystem::path(a.out_dir) / ("truth_" + std::to_string(seed) + ".csv"), factory(seed));

  out << scenario << ": " << camp.seeds.size() << " seed(s), h = " << camp.filter_cfg->substeps << "\n";
  print_summary(out, res);
  out << "results written to " << a.out_dir << "\n";
  return res.any_divergence() ? kDivergence : kOk;
}

std::vector<int> parse_int_list(const std::string& list, const char* what) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1) throw ConfigError(std::string(what) + ": expected positive integers");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

int cmd_complexity(int n_max, const std::string& js, const std::string& hs, const std::string& path,
                   std::ostream& out) {
  const auto grid = complexity_grid(n_max, parse_int_list(js, "--j"), parse_int_list(hs, "--h"));
  write_complexity_csv(path, grid);
  out << grid.rows.size() << " grid rows written to " << path << "\n";
  char line[128];
  for (const auto& l : grid.limits) {
    std::snprintf(line, sizeof line, "limit %-7s j=%-4d h=%-4d n=%.6f\n", std::string(to_string(l.algo)).c_str(),
                  l.j, l.h, l.limit);
    out << line;
  }
  return kOk;
}

int cmd_probe(const std::string& scenario, const std::string& method, const std::string& config,
              std::ostream& out) {
  check_scenario(scenario);
  ApproxMethod m;
  try {
    m = parse_approx_method(method);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const LoadedConfig cfg = load_config(scenario, config);
  const ProbeSetup setup = scenario == "reentry" ? reentry_probe_setup(cfg.reentry) : gnss_probe_setup(cfg.gnss);
  const auto res = run_probe(setup, m);
  char line[128];
  out << "scale,delta_y,max_error\n";
  for (std::size_t i = 0; i < res.samples.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6g,%.9g,%.9g\n", res.samples[i].first, res.delta_y[i],
                  res.samples[i].second);
    out << line;
  }
  if (res.status == ProbeStatus::fitted) {
    std::snprintf(line, sizeof line, "slope %.4f\n", res.slope);
    out << line;
  } else {
    out << "ExactRegime\n";
  }
  return kOk;
}

int cmd_print_config(const std::string& scenario, std::ostream& out) {
  check_scenario(scenario);
  json j = scenario == "reentry" ? to_json(ReentryConfig{}) : to_json(GnssConfig{});
  FilterConfig f;
  f.substeps = scenario == "reentry" ? ReentryConfig{}.substeps : GnssConfig{}.substeps;
  j["filter"] = to_json(f);
  out << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sigma-point filter benchmark"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Monte Carlo filter campaign");
  run->add_option("--scenario", ra.scenario, "reentry or leo-gnss")->required();
  run->add_option("--filters", ra.filters, "Comma-separated filter list");
  run->add_option("--seeds", ra.seeds, "Number of seeds");
  run->add_option("--first-seed", ra.first_seed, "First seed value");
  run->add_option("--steps", ra.steps, "Limit on filter steps per run (0 = full scenario)");
  run->add_option("--warmup", ra.warmup, "Steps excluded from timing statistics");
  run->add_option("--substeps", ra.substeps, "Override the RK4 substeps per filter step");
  run->add_option("--out", ra.out_dir, "Output directory")->required();
  run->add_option("--config", ra.config, "Scenario configuration (JSON)");
  run->add_flag("--sequential-timing", ra.sequential, "Run every filter on one thread");
  run->add_flag("--export-truth", ra.export_truth, "Also write truth_<seed>.csv");

  int n_max = 50;
  std::string js = "1,10,50,100", hs = "1,2,5,10", cx_out;
  auto* cx = app.add_subcommand("complexity", "Evaluate the analytic cost model over a grid");
  cx->set_help_flag("--help", "Print this help message and exit");
  cx->add_option("--n-max", n_max, "Largest state dimension");
  cx->add_option("--j", js, "Comma-separated j values");
  cx->add_option("--h", hs, "Comma-separated h values");
  cx->add_option("--out", cx_out, "Output CSV")->required();

  std::string probe_scenario, probe_method, probe_config;
  auto* probe = app.add_subcommand("probe-order", "Empirical order of the sigma-point reconstruction error");
  probe->add_option("--scenario", probe_scenario, "reentry or leo-gnss")->required();
  probe->add_option("--method", probe_method, "spukf or espukf")->required();
  probe->add_option("--config", probe_config, "Scenario configuration (JSON)");

  std::string pc_scenario;
  auto* pc = app.add_subcommand("print-config", "Print the default configuration as JSON");
  pc->add_option("--scenario", pc_scenario, "reentry or leo-gnss")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(ra, out);
    if (*cx) return cmd_complexity(n_max, js, hs, cx_out, out);
    if (*probe) return cmd_probe(probe_scenario, probe_method, probe_config, out);
    if (*pc) return cmd_print_config(pc_scenario, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace spukf::cli
