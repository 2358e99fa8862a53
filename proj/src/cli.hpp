#pragma once

#include <iosfwd>

namespace spukf::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDivergence = 3 };

/// Entry point of the spukf_bench tool. Subcommands: run, complexity, probe-order, print-config.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spukf::cli
