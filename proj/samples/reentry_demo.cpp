// Tracks one simulated re-entry with every filter and prints the steady-state
// altitude error and mean step time.

#include <cstdio>
#include <cstdlib>

#include "spukf/harness.hpp"
#include "spukf/reentry.hpp"

int main(int argc, char** argv) {
  using namespace spukf;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;

  const ScenarioData data = make_reentry_scenario(ReentryConfig{}, seed);
  std::printf("%-8s %16s %14s\n", "filter", "altitude err ft", "step us");
  for (FilterKind kind : kAllFilters) {
    const RunResult r = run_scenario(data, kind, seed);
    std::printf("%-8s %16.3f %14.2f%s\n", r.filter.c_str(), r.mean_steady_error, r.mean_step_ns / 1e3,
                r.diverged ? "  (diverged)" : "");
  }
}
