#pragma once

#include <stdexcept>
#include <string>

namespace pfoc {

/// Inputs live on different grids or have the wrong number of levels.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (e.g. |r| > 1 for F1,log).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative solve failed to converge or a system matrix lost definiteness.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual = 0.0)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Invalid run configuration; `line` is 0 when no source position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace pfoc
