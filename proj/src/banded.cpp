#include "pfoc/banded.hpp"

#include <cmath>
#include <string>

#include "pfoc/error.hpp"

namespace pfoc {

BandedSpdSolver::BandedSpdSolver(const GridSpec& grid, std::span<const double> diag, double lap_scale)
    : BandedSpdSolver(grid, diag, lap_scale, std::vector<char>(grid.node_count(), 0)) {}

BandedSpdSolver::BandedSpdSolver(const GridSpec& grid, std::span<const double> diag, double lap_scale,
                                 const std::vector<char>& fixed)
    : n_(grid.node_count()), weights_(grid.weights()), fixed_(fixed) {
  require_on_grid(diag, grid, "BandedSpdSolver");
  if (fixed_.size() != n_) throw StructuralError("BandedSpdSolver: fixed mask size mismatch");
  band_ = grid.dimension() == 2 ? static_cast<std::size_t>(grid.nodes(0)) : 1;
  const std::size_t width = band_ + 1;
  chol_.assign(n_ * width, 0.0);
  fixed_couplings_.assign(n_, {});

  const auto stencil = laplacian_stencil(grid);
  for (std::size_t i = 0; i < n_; ++i) {
    if (fixed_[i]) {
      chol_[i * width] = 1.0;
      continue;
    }
    for (const auto& e : stencil[i]) {
      const double sij = weights_[i] * ((e.col == i ? diag[i] : 0.0) - lap_scale * e.coeff);
      if (fixed_[e.col] && e.col != i) {
        fixed_couplings_[i].push_back({e.col, sij});
        continue;
      }
      if (e.col <= i) chol_[i * width + (i - e.col)] += sij;
    }
  }
  factor();
}

void BandedSpdSolver::factor() {
  const std::size_t width = band_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jmin = i >= band_ ? i - band_ : 0;
    for (std::size_t j = jmin; j <= i; ++j) {
      double s = chol_[i * width + (i - j)];
      const std::size_t kmin = std::max(jmin, j >= band_ ? j - band_ : 0);
      for (std::size_t k = kmin; k < j; ++k) {
        s -= chol_[i * width + (i - k)] * chol_[j * width + (j - k)];
      }
      if (j == i) {
        if (!(s > 0.0) || !std::isfinite(s)) {
          throw SolverError("banded system is not positive definite at node " + std::to_string(i), s);
        }
        chol_[i * width] = std::sqrt(s);
      } else {
        chol_[i * width + (i - j)] = s / chol_[j * width];
      }
    }
  }
}

Field BandedSpdSolver::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw StructuralError("BandedSpdSolver::solve: size mismatch");
  const std::size_t width = band_ + 1;
  Field y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (fixed_[i]) {
      y[i] = rhs[i];
      continue;
    }
    double b = weights_[i] * rhs[i];
    for (const auto& [col, sij] : fixed_couplings_[i]) b -= sij * rhs[col];
    y[i] = b;
  }
  // forward: L z = y
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jmin = i >= band_ ? i - band_ : 0;
    double s = y[i];
    for (std::size_t j = jmin; j < i; ++j) s -= chol_[i * width + (i - j)] * y[j];
    y[i] = s / chol_[i * width];
  }
  // backward: L^T x = z
  for (std::size_t i = n_; i-- > 0;) {
    double s = y[i];
    const std::size_t jmax = std::min(n_ - 1, i + band_);
    for (std::size_t j = i + 1; j <= jmax; ++j) s -= chol_[j * width + (j - i)] * y[j];
    y[i] = s / chol_[i * width];
  }
  return y;
}

Field apply_shifted_laplacian(const GridSpec& grid, std::span<const double> diag, double lap_scale,
                              std::span<const double> x) {
  Field out = laplacian_neumann(x, grid);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = diag[n] * x[n] - lap_scale * out[n];
  return out;
}

}  // namespace pfoc
