#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfoc {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitInvariant = 3 };

/**
 * pfoc <subcommand> <config.json> [--out DIR] [--threads N]
 *
 * Subcommands: simulate, simulate-obstacle, adjoint, gradient-check, optimize,
 * quench-sweep, approx-control. Each run writes manifest.json, CSV files and
 * summary.json into a fresh timestamped directory below DIR.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfoc
