#pragma once

// Benchmark driver: runs filters over generated scenarios, times the
// predict + update of every step and aggregates Monte Carlo statistics.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spukf/filters.hpp"
#include "spukf/scenario.hpp"

namespace spukf {

/// Monotonic nanosecond clock; injectable so tests can substitute a mock.
using Clock = std::function<std::int64_t()>;

inline std::int64_t steady_clock_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct RunOptions {
  std::size_t warmup_steps = 10;
  double divergence_threshold = 1e9;
  Clock clock = steady_clock_ns;
  bool timing = true;
  std::optional<FilterConfig> filter_cfg;  // overrides the scenario's configuration
  std::size_t max_steps = 0;               // 0: run the full scenario
};

struct RunResult {
  std::string filter;
  std::uint64_t seed = 0;
  std::vector<double> t;
  std::vector<Vector> errors;  // estimate minus truth
  std::vector<double> metric;  // scenario scalar error per step
  std::vector<double> norm;    // Euclidean norm of the error vector
  std::vector<std::int64_t> step_ns;
  double mean_steady_error = std::numeric_limits<double>::quiet_NaN();
  double mean_step_ns = 0.0;
  double median_step_ns = 0.0;
  bool diverged = false;
  std::string failure;
  // Worst min eigenvalue / trace and worst relative asymmetry of P+ over the run.
  double worst_psd_ratio = std::numeric_limits<double>::infinity();
  double worst_asymmetry = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

inline void track_covariance(RunResult& r, const Matrix& p) {
  const double scale = std::max(1e-300, p.cwiseAbs().maxCoeff());
  r.worst_asymmetry = std::max(r.worst_asymmetry, (p - p.transpose()).cwiseAbs().maxCoeff() / scale);
  // Relative to each variance so mixed units (metres and seconds) do not hide a loss of PSD.
  const Vector d = p.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Matrix corr = d.asDiagonal() * p * d.asDiagonal();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(corr, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  r.worst_psd_ratio = std::min(r.worst_psd_ratio, min_eig / corr.trace());
}

}  // namespace detail

/// Steps one filter over the scenario's measurement sequence.
inline RunResult run_scenario(const ScenarioData& s, FilterKind kind, std::uint64_t seed,
                              const RunOptions& opt = {}) {
  RunResult r;
  r.filter = std::string(to_string(kind));
  r.seed = seed;
  const FilterConfig cfg = opt.filter_cfg.value_or(s.filter_cfg);
  validate(cfg, s.dyn.state_dim);

  std::size_t steps = s.steps();
  if (opt.max_steps > 0) steps = std::min(steps, opt.max_steps);
  r.t.reserve(steps);
  r.errors.reserve(steps);
  r.step_ns.reserve(steps);

  StateEstimate est = s.initial;
  for (std::size_t k = 1; k <= steps; ++k) {
    const MeasurementModel& meas = s.meas_at(k);
    std::int64_t elapsed = 0;
    try {
      if (opt.timing) {
        const std::int64_t t0 = opt.clock();
        est = filter_step(kind, s.dyn, meas, est, s.z[k], s.dt(k), cfg);
        elapsed = std::max<std::int64_t>(1, opt.clock() - t0);
      } else {
        est = filter_step(kind, s.dyn, meas, est, s.z[k], s.dt(k), cfg);
        elapsed = 1;
      }
    } catch (const Error& e) {
      r.diverged = true;
      r.failure = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
    const Vector err = est.mean - s.truth[k];
    r.t.push_back(s.times[k]);
    r.errors.push_back(err);
    r.metric.push_back(s.metric(err));
    r.norm.push_back(err.norm());
    r.step_ns.push_back(elapsed);
    detail::track_covariance(r, est.cov);
    if (!(r.norm.back() <= opt.divergence_threshold)) {
      r.diverged = true;
      r.failure = "step " + std::to_string(k) + ": error norm exceeds threshold";
      break;
    }
  }

  if (!r.diverged) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      if (r.t[i] >= s.steady_start - 1e-9 && r.t[i] <= s.steady_end + 1e-9) {
        sum += r.metric[i];
        ++count;
      }
    }
    r.mean_steady_error = count ? sum / static_cast<double>(count) : std::nan("");
  }

  std::vector<double> timed;
  for (std::size_t i = opt.warmup_steps; i < r.step_ns.size(); ++i)
    timed.push_back(static_cast<double>(r.step_ns[i]));
  if (timed.empty())
    for (auto v : r.step_ns) timed.push_back(static_cast<double>(v));
  if (!timed.empty()) {
    r.mean_step_ns = std::accumulate(timed.begin(), timed.end(), 0.0) / static_cast<double>(timed.size());
    r.median_step_ns = detail::median(timed);
  }
  return r;
}

using ScenarioFactory = std::function<ScenarioData(std::uint64_t seed)>;

struct CampaignConfig {
  std::string scenario = "reentry";
  std::vector<FilterKind> filters{std::begin(kAllFilters), std::end(kAllFilters)};
  std::vector<std::uint64_t> seeds{1};
  std::size_t warmup_steps = 10;
  std::size_t max_steps = 0;
  bool sequential = false;
  std::optional<FilterConfig> filter_cfg;
  std::string output_dir;
};

inline void validate(const CampaignConfig& c) {
  if (c.seeds.empty()) throw ConfigError("campaign: at least one seed required");
  auto sorted = c.seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("campaign: seeds must be distinct");
  if (c.filters.empty()) throw ConfigError("campaign: no filters selected");
}

struct SummaryRow {
  std::string filter;
  double mean_err = 0.0;
  double std_err = 0.0;
  double mean_step_ns = 0.0;
  double reduction_pct = 0.0;
  double median_step_ns = 0.0;
  std::size_t runs = 0;
  std::size_t diverged = 0;
};

struct CampaignResult {
  std::vector<RunResult> runs;
  std::vector<SummaryRow> summary;
  bool any_divergence() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.diverged; });
  }
};

struct ReductionRow {
  std::string filter;
  double mean_step_ns = 0.0;
  double reduction_pct = 0.0;
};

/// Percentage per-step time reduction of each filter relative to the UKF.
inline std::vector<ReductionRow> timing_report(const std::vector<SummaryRow>& rows) {
  const auto ukf = std::find_if(rows.begin(), rows.end(),
                                [](const SummaryRow& r) { return r.filter == "ukf"; });
  if (ukf == rows.end()) throw InvalidArgument("timing_report: no ukf results");
  std::vector<ReductionRow> out;
  for (const auto& r : rows)
    out.push_back({r.filter, r.mean_step_ns,
                   (ukf->mean_step_ns - r.mean_step_ns) / ukf->mean_step_ns * 100.0});
  return out;
}

inline std::vector<SummaryRow> summarize(const std::vector<FilterKind>& filters,
                                         const std::vector<RunResult>& runs) {
  std::vector<SummaryRow> rows;
  for (FilterKind k : filters) {
    SummaryRow row;
    row.filter = std::string(to_string(k));
    std::vector<double> errs, times, medians;
    for (const auto& r : runs) {
      if (r.filter != row.filter) continue;
      ++row.runs;
      if (r.diverged) {
        ++row.diverged;
        continue;
      }
      errs.push_back(r.mean_steady_error);
      times.push_back(r.mean_step_ns);
      medians.push_back(r.median_step_ns);
    }
    if (!errs.empty()) {
      const double m = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
      double ss = 0.0;
      for (double e : errs) ss += (e - m) * (e - m);
      row.mean_err = m;
      row.std_err = errs.size() > 1 ? std::sqrt(ss / static_cast<double>(errs.size() - 1)) : 0.0;
      row.mean_step_ns =
          std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
      row.median_step_ns = detail::median(medians);
    } else {
      row.mean_err = row.std_err = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  const bool has_ukf = std::any_of(rows.begin(), rows.end(), [](const SummaryRow& r) {
    return r.filter == "ukf" && r.mean_step_ns > 0.0;
  });
  if (has_ukf) {
    const auto red = timing_report(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].reduction_pct = red[i].reduction_pct;
  }
  return rows;
}

/// Generates each seed's scenario once, then runs every (seed, filter) pair.
/// Pairs are spread over a worker pool unless `sequential` is set.
inline CampaignResult monte_carlo(const CampaignConfig& cfg, const ScenarioFactory& factory,
                                  const Clock& clock = steady_clock_ns) {
  validate(cfg);
  std::vector<ScenarioData> data(cfg.seeds.size());
  const std::size_t n_jobs = cfg.seeds.size() * cfg.filters.size();
  std::vector<RunResult> results(n_jobs);
  const unsigned workers =
      cfg.sequential ? 1u : std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                            static_cast<unsigned>(n_jobs)));

  auto run_pool = [&](std::size_t count, const std::function<void(std::size_t)>& job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
  };

  run_pool(cfg.seeds.size(), [&](std::size_t i) { data[i] = factory(cfg.seeds[i]); });

  RunOptions opt;
  opt.warmup_steps = cfg.warmup_steps;
  opt.max_steps = cfg.max_steps;
  opt.filter_cfg = cfg.filter_cfg;
  opt.clock = clock;
  run_pool(n_jobs, [&](std::size_t job) {
    const std::size_t si = job / cfg.filters.size();
    const std::size_t fi = job % cfg.filters.size();
    results[job] = run_scenario(data[si], cfg.filters[fi], cfg.seeds[si], opt);
  });

  CampaignResult out;
  out.runs = std::move(results);
  out.summary = summarize(cfg.filters, out.runs);
  return out;
}

}  // namespace spukf
