#include "pfoc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfoc/error.hpp"

namespace pfoc {

GridSpec::GridSpec(int dimension, std::array<double, 2> extents, std::array<int, 2> nodes)
    : dimension_(dimension), extents_(extents), nodes_(nodes) {
  if (dimension != 1 && dimension != 2) {
    throw StructuralError("grid dimension must be 1 or 2");
  }
  if (dimension == 1) nodes_[1] = 1;
  for (int a = 0; a < dimension; ++a) {
    if (nodes_[a] < 3) throw StructuralError("grid needs at least 3 nodes per axis");
    if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a])) {
      throw StructuralError("grid extents must be positive and finite");
    }
  }
  weights_.assign(node_count(), 0.0);
  const int nx = nodes_[0];
  const int ny = nodes_[1];
  const double hx = spacing(0);
  for (int j = 0; j < ny; ++j) {
    double wy = 1.0;
    if (dimension_ == 2) {
      wy = spacing(1);
      if (j == 0 || j == ny - 1) wy *= 0.5;
    }
    for (int i = 0; i < nx; ++i) {
      double wx = (i == 0 || i == nx - 1) ? 0.5 * hx : hx;
      weights_[static_cast<std::size_t>(j) * nx + i] = wx * wy;
    }
  }
}

GridSpec GridSpec::line(double length, int nodes) { return GridSpec(1, {length, 1.0}, {nodes, 1}); }

GridSpec GridSpec::rectangle(double lx, double ly, int nx, int ny) {
  return GridSpec(2, {lx, ly}, {nx, ny});
}

std::size_t GridSpec::node_count() const {
  return static_cast<std::size_t>(nodes_[0]) * static_cast<std::size_t>(dimension_ == 2 ? nodes_[1] : 1);
}

double GridSpec::measure() const { return dimension_ == 2 ? extents_[0] * extents_[1] : extents_[0]; }

bool GridSpec::operator==(const GridSpec& other) const {
  if (dimension_ != other.dimension_) return false;
  for (int a = 0; a < dimension_; ++a) {
    if (extents_[a] != other.extents_[a] || nodes_[a] != other.nodes_[a]) return false;
  }
  return true;
}

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (steps < 1) throw StructuralError("time grid needs at least one step");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw StructuralError("time horizon must be positive");
}

void require_on_grid(std::span<const double> f, const GridSpec& grid, const char* what) {
  if (f.size() != grid.node_count()) {
    throw StructuralError(std::string(what) + ": field has " + std::to_string(f.size()) +
                          " values, grid has " + std::to_string(grid.node_count()) + " nodes");
  }
}

void require_levels(const Series& s, const TimeGrid& tg, const GridSpec& grid, const char* what) {
  if (s.size() != tg.levels()) {
    throw StructuralError(std::string(what) + ": expected " + std::to_string(tg.levels()) +
                          " time levels, got " + std::to_string(s.size()));
  }
  for (const auto& f : s) require_on_grid(f, grid, what);
}

namespace {

// Second difference along one axis with mirrored ghosts: at a boundary node the
// ghost equals the first interior neighbour, giving 2(u_1 - u_0)/h^2.
template <typename Emit>
void for_each_axis_coupling(const GridSpec& grid, std::size_t node, Emit&& emit) {
  const int nx = grid.nodes(0);
  const int i = static_cast<int>(node % nx);
  const int j = static_cast<int>(node / nx);
  for (int axis = 0; axis < grid.dimension(); ++axis) {
    const double h = grid.spacing(axis);
    const double inv = 1.0 / (h * h);
    const int n = grid.nodes(axis);
    const int idx = axis == 0 ? i : j;
    const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(nx);
    if (idx == 0) {
      emit(node + stride, 2.0 * inv);
    } else if (idx == n - 1) {
      emit(node - stride, 2.0 * inv);
    } else {
      emit(node - stride, inv);
      emit(node + stride, inv);
    }
    emit(node, -2.0 * inv);
  }
}

}  // namespace

Field laplacian_neumann(std::span<const double> field, const GridSpec& grid) {
  require_on_grid(field, grid, "laplacian_neumann");
  Field out(field.size(), 0.0);
  for (std::size_t n = 0; n < field.size(); ++n) {
    double acc = 0.0;
    for_each_axis_coupling(grid, n, [&](std::size_t col, double c) { acc += c * field[col]; });
    out[n] = acc;
  }
  return out;
}

std::vector<std::vector<StencilEntry>> laplacian_stencil(const GridSpec& grid) {
  std::vector<std::vector<StencilEntry>> rows(grid.node_count());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    auto& row = rows[n];
    row.push_back({n, 0.0});
    for_each_axis_coupling(grid, n, [&](std::size_t col, double c) {
      if (col == n) {
        row.front().coeff += c;
      } else {
        row.push_back({col, c});
      }
    });
  }
  return rows;
}

double inner_product_l2(std::span<const double> a, std::span<const double> b, const GridSpec& grid) {
  require_on_grid(a, grid, "inner_product_l2");
  require_on_grid(b, grid, "inner_product_l2");
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += w[n] * a[n] * b[n];
  return acc;
}

double norm_l2(std::span<const double> a, const GridSpec& grid) {
  return std::sqrt(std::max(0.0, inner_product_l2(a, a, grid)));
}

double gradient_energy(std::span<const double> a, const GridSpec& grid) {
  const Field la = laplacian_neumann(a, grid);
  return std::max(0.0, -inner_product_l2(la, a, grid));
}

double norm_h1(std::span<const double> a, const GridSpec& grid) {
  return std::sqrt(inner_product_l2(a, a, grid) + gradient_energy(a, grid));
}

Series convolve_forward(const Series& series, const TimeGrid& tg) {
  if (series.size() != tg.levels()) throw StructuralError("convolve_forward: level count mismatch");
  const double dt = tg.dt();
  Series out(series.size(), Field(series.front().size(), 0.0));
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k - 1].size() != out[k].size()) throw StructuralError("convolve_forward: ragged series");
    for (std::size_t n = 0; n < out[k].size(); ++n) out[k][n] = out[k - 1][n] + dt * series[k - 1][n];
  }
  return out;
}

Series convolve_backward(const Series& series, const TimeGrid& tg) {
  if (series.size() != tg.levels()) throw StructuralError("convolve_backward: level count mismatch");
  const double dt = tg.dt();
  Series out(series.size(), Field(series.back().size(), 0.0));
  for (std::size_t k = series.size() - 1; k-- > 0;) {
    if (series[k].size() != out[k].size()) throw StructuralError("convolve_backward: ragged series");
    for (std::size_t n = 0; n < out[k].size(); ++n) out[k][n] = out[k + 1][n] + dt * series[k][n];
  }
  return out;
}

std::vector<double> time_weights(const TimeGrid& tg, TimeRule rule) {
  std::vector<double> w(tg.levels(), tg.dt());
  if (rule == TimeRule::StateRightRectangle) {
    w.front() = 0.0;
  } else {
    w.back() = 0.0;
  }
  return w;
}

double inner_product_q(const Series& a, const Series& b, const GridSpec& grid, const TimeGrid& tg,
                       TimeRule rule) {
  require_levels(a, tg, grid, "inner_product_q");
  require_levels(b, tg, grid, "inner_product_q");
  const auto tw = time_weights(tg, rule);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (tw[k] != 0.0) acc += tw[k] * inner_product_l2(a[k], b[k], grid);
  }
  return acc;
}

double norm_q(const Series& a, const GridSpec& grid, const TimeGrid& tg, TimeRule rule) {
  return std::sqrt(std::max(0.0, inner_product_q(a, a, grid, tg, rule)));
}

double norm_linf_l2(const Series& a, const GridSpec& grid) {
  double m = 0.0;
  for (const auto& f : a) m = std::max(m, norm_l2(f, grid));
  return m;
}

double norm_linf_h1(const Series& a, const GridSpec& grid) {
  double m = 0.0;
  for (const auto& f : a) m = std::max(m, norm_h1(f, grid));
  return m;
}

double norm_l2_h1(const Series& a, const GridSpec& grid, const TimeGrid& tg) {
  double acc = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    const double h1 = norm_h1(a[k], grid);
    acc += tg.dt() * h1 * h1;
  }
  return std::sqrt(acc);
}

double norm_h1_l2(const Series& a, const GridSpec& grid, const TimeGrid& tg) {
  const double dt = tg.dt();
  double acc = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    Field d(a[k].size());
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = (a[k][n] - a[k - 1][n]) / dt;
    const double l2 = norm_l2(a[k], grid);
    const double dl2 = norm_l2(d, grid);
    acc += dt * (l2 * l2 + dl2 * dl2);
  }
  return std::sqrt(acc);
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const Series& a) {
  double m = 0.0;
  for (const auto& f : a) m = std::max(m, max_abs(f));
  return m;
}

Series zeros_series(const GridSpec& grid, const TimeGrid& tg) {
  return Series(tg.levels(), grid.zeros());
}

Series difference(const Series& a, const Series& b) {
  if (a.size() != b.size()) throw StructuralError("difference: level count mismatch");
  Series out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].size() != b[k].size()) throw StructuralError("difference: node count mismatch");
    out[k].resize(a[k].size());
    for (std::size_t n = 0; n < a[k].size(); ++n) out[k][n] = a[k][n] - b[k][n];
  }
  return out;
}

}  // namespace pfoc
