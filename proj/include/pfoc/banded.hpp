#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pfoc/geometry.hpp"

namespace pfoc {

/**
 * Direct solver for A = diag(d) - s * L with L the Neumann Laplacian.
 *
 * A is not symmetric as a matrix, but W A is (W = lumped weights), so the
 * solve factors W A with a banded Cholesky. Half-bandwidth is 1 in 1D and
 * nx in 2D (natural ordering). Nodes flagged in `fixed` are eliminated and
 * take prescribed values (used by the active-set obstacle step).
 */
class BandedSpdSolver {
 public:
  BandedSpdSolver(const GridSpec& grid, std::span<const double> diag, double lap_scale);
  BandedSpdSolver(const GridSpec& grid, std::span<const double> diag, double lap_scale,
                  const std::vector<char>& fixed);

  /// Solves A x = rhs; entries of rhs at fixed nodes are the prescribed values.
  Field solve(std::span<const double> rhs) const;

  std::size_t size() const { return n_; }

 private:
  void factor();

  std::size_t n_ = 0;
  std::size_t band_ = 0;
  std::vector<double> weights_;
  std::vector<char> fixed_;
  // Off-diagonal couplings to fixed columns, needed to shift the right-hand side.
  std::vector<std::vector<std::pair<std::size_t, double>>> fixed_couplings_;
  // Lower band, row-major: chol_[i * (band_ + 1) + k] holds entry (i, i - k).
  std::vector<double> chol_;
};

/// y = diag(d) x - s * L x
Field apply_shifted_laplacian(const GridSpec& grid, std::span<const double> diag, double lap_scale,
                              std::span<const double> x);

}  // namespace pfoc
