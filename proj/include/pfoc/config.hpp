#pragma once

#include <cstdint>
#include <string>

#include "pfoc/deep_quench.hpp"
#include "pfoc/optimizer.hpp"
#include "pfoc/problem.hpp"

namespace pfoc {

struct VerificationOptions {
  int pairs = 5;
  std::uint64_t seed = 1;
  double h0 = 1e-5;
  int steps = 6;
  double perturbation = 0.01;
};

/// A problem bundle plus the options of every subcommand.
struct RunConfig {
  Problem problem;
  OptimizerOptions optimizer;
  QuenchSchedule quench;
  VerificationOptions verification;
};

/**
 * Parses and validates a JSON run configuration. Fields accept a number, an
 * expression string over x, y (and t for space-time fields) or explicit nodal
 * arrays. A manifest written by the CLI is accepted as well (its "config"
 * member is used). Errors are ConfigError with the source line.
 */
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Fully resolved configuration (every field as nodal arrays); parse_config(write_config(c)) == c.
std::string write_config(const RunConfig& config);

}  // namespace pfoc
