#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pfoc {

/// Nodal values of a scalar field, one entry per grid node (x fastest in 2D).
using Field = std::vector<double>;

/// Time-indexed fields on levels 0..N.
using Series = std::vector<Field>;

/**
 * Uniform tensor grid on [0, L_x] (1D) or [0, L_x] x [0, L_y] (2D).
 *
 * Nodes sit on the boundary; spacing = extent / (nodes - 1). Quadrature is the
 * trapezoid rule (lumped mass with half weights on boundary nodes), which is
 * also the weight that makes the mirror-ghost Neumann Laplacian symmetric.
 */
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int dimension, std::array<double, 2> extents, std::array<int, 2> nodes);

  static GridSpec line(double length, int nodes);
  static GridSpec rectangle(double lx, double ly, int nx, int ny);

  int dimension() const { return dimension_; }
  double extent(int axis) const { return extents_[axis]; }
  int nodes(int axis) const { return nodes_[axis]; }
  double spacing(int axis) const { return extents_[axis] / (nodes_[axis] - 1); }
  std::size_t node_count() const;
  double measure() const;

  /// Physical coordinate of node index `i` along `axis`.
  double coordinate(int axis, int i) const { return i * spacing(axis); }

  /// Lumped (trapezoid) quadrature weights, one per node.
  const std::vector<double>& weights() const { return weights_; }

  Field zeros() const { return Field(node_count(), 0.0); }
  Field constant(double c) const { return Field(node_count(), c); }

  bool operator==(const GridSpec& other) const;

 private:
  int dimension_ = 1;
  std::array<double, 2> extents_{1.0, 1.0};
  std::array<int, 2> nodes_{3, 1};
  std::vector<double> weights_;
};

/// Uniform time grid t_k = k * dt on [0, T], k = 0..N.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, int steps);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double dt() const { return horizon_ / steps_; }
  double time(int k) const { return k * dt(); }
  std::size_t levels() const { return static_cast<std::size_t>(steps_) + 1; }

  bool operator==(const TimeGrid& other) const = default;

 private:
  double horizon_ = 1.0;
  int steps_ = 1;
};

void require_on_grid(std::span<const double> f, const GridSpec& grid, const char* what);
void require_levels(const Series& s, const TimeGrid& tg, const GridSpec& grid, const char* what);

/// Homogeneous-Neumann Laplacian via mirrored ghost nodes.
Field laplacian_neumann(std::span<const double> field, const GridSpec& grid);

/// One stencil entry of the Laplacian: row i couples to column `col` with `coeff`.
struct StencilEntry {
  std::size_t col;
  double coeff;
};

/// Row-wise stencil of the Neumann Laplacian (diagonal entry first).
std::vector<std::vector<StencilEntry>> laplacian_stencil(const GridSpec& grid);

double inner_product_l2(std::span<const double> a, std::span<const double> b, const GridSpec& grid);
double norm_l2(std::span<const double> a, const GridSpec& grid);

/// Discrete |grad a|^2 integrated over the domain: -<La, a> (forward differences per edge).
double gradient_energy(std::span<const double> a, const GridSpec& grid);
double norm_h1(std::span<const double> a, const GridSpec& grid);

/// (1 * v)(t_k) = dt * sum_{j<k} v_j (left rectangle); level 0 is zero.
Series convolve_forward(const Series& series, const TimeGrid& tg);

/// (1 (*) v)(t_k) = dt * sum_{j=k}^{N-1} v_j; level N is zero.
Series convolve_backward(const Series& series, const TimeGrid& tg);

/// Space-time quadrature weights in time.
///
/// State integrals sample the implicit levels 1..N; control integrals sample
/// the levels 0..N-1 that drive each step. Both give weight dt per used level.
enum class TimeRule { StateRightRectangle, ControlLeftRectangle };

std::vector<double> time_weights(const TimeGrid& tg, TimeRule rule);

double inner_product_q(const Series& a, const Series& b, const GridSpec& grid, const TimeGrid& tg,
                       TimeRule rule);
double norm_q(const Series& a, const GridSpec& grid, const TimeGrid& tg, TimeRule rule);

/// max_k ||a_k||_{L2}
double norm_linf_l2(const Series& a, const GridSpec& grid);
/// max_k ||a_k||_{H1}
double norm_linf_h1(const Series& a, const GridSpec& grid);
/// (sum_k dt ||a_k||_{H1}^2)^{1/2} over levels 1..N
double norm_l2_h1(const Series& a, const GridSpec& grid, const TimeGrid& tg);
/// (||a||_{L2(L2)}^2 + ||(a_k - a_{k-1})/dt||_{L2(L2)}^2)^{1/2}
double norm_h1_l2(const Series& a, const GridSpec& grid, const TimeGrid& tg);
double max_abs(const Series& a);
double max_abs(std::span<const double> a);

Series zeros_series(const GridSpec& grid, const TimeGrid& tg);
Series difference(const Series& a, const Series& b);

}  // namespace pfoc
