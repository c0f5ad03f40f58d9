#include <cmath>
#include <random>

#include "doctest.h"
#include "pfoc/banded.hpp"
#include "pfoc/error.hpp"
#include "pfoc/geometry.hpp"

using namespace pfoc;

namespace {

Field random_field(const GridSpec& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g.node_count());
  for (double& x : f) x = u(rng);
  return f;
}

// Column j of the Laplacian, applied to unit vectors.
std::vector<Field> dense_laplacian(const GridSpec& g) {
  const std::size_t n = g.node_count();
  std::vector<Field> cols;
  for (std::size_t j = 0; j < n; ++j) {
    Field e(n, 0.0);
    e[j] = 1.0;
    cols.push_back(laplacian_neumann(e, g));
  }
  return cols;
}

// Gaussian elimination with partial pivoting on a dense copy.
Field dense_solve(std::vector<std::vector<double>> a, Field b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Field x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("grid construction rejects fewer than three nodes per axis") {
  CHECK_THROWS_AS(GridSpec::line(1.0, 2), StructuralError);
  CHECK_THROWS_AS(GridSpec::rectangle(1.0, 1.0, 4, 2), StructuralError);
  const GridSpec g = GridSpec::rectangle(2.0, 1.0, 5, 3);
  CHECK(g.node_count() == 15);
  CHECK(g.spacing(0) == 0.5);
  CHECK(g.spacing(1) == 0.5);
  CHECK_THROWS(TimeGrid(1.0, 0));
}

TEST_CASE("laplacian of a constant vanishes") {
  for (const GridSpec& g : {GridSpec::line(1.0, 9), GridSpec::rectangle(1.0, 2.0, 6, 7)}) {
    const Field l = laplacian_neumann(g.constant(3.7), g);
    for (double v : l) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("second difference of x^2 is exactly 2 in the interior") {
  const GridSpec g = GridSpec::line(1.0, 11);
  Field f(g.node_count());
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = std::pow(g.coordinate(0, static_cast<int>(n)), 2);
  const Field l = laplacian_neumann(f, g);
  for (std::size_t n = 1; n + 1 < f.size(); ++n) CHECK(l[n] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("laplacian rows sum to zero and the weighted matrix is symmetric") {
  for (const GridSpec& g : {GridSpec::line(1.0, 12), GridSpec::rectangle(1.0, 0.7, 5, 6)}) {
    const auto cols = dense_laplacian(g);
    const auto& w = g.weights();
    const std::size_t n = g.node_count();
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += cols[j][i];
      CHECK(std::abs(row) < 1e-9);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(w[i] * cols[j][i] == doctest::Approx(w[j] * cols[i][j]).epsilon(1e-12));
      }
    }
    const Field a = random_field(g, 1), b = random_field(g, 2);
    const double lhs = inner_product_l2(laplacian_neumann(a, g), b, g);
    const double rhs = inner_product_l2(a, laplacian_neumann(b, g), g);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }
}

TEST_CASE("inner product examples") {
  const GridSpec g = GridSpec::line(1.0, 101);
  Field x(g.node_count());
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = g.coordinate(0, static_cast<int>(n));
  CHECK(inner_product_l2(g.constant(1.0), g.constant(1.0), g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inner_product_l2(g.constant(1.0), x, g) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(inner_product_l2(x, x, g) - 1.0 / 3.0) < 1e-4);
  CHECK_THROWS_AS(inner_product_l2(x, Field(5, 0.0), g), StructuralError);
}

TEST_CASE("trapezoid norm converges at second order") {
  std::vector<double> hs, errs;
  for (int nodes : {11, 21, 41, 81}) {
    const GridSpec g = GridSpec::line(1.0, nodes);
    Field f(g.node_count());
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = std::sin(3.0 * g.coordinate(0, static_cast<int>(n)));
    const double exact = 0.5 - std::sin(6.0) / 12.0;
    hs.push_back(g.spacing(0));
    errs.push_back(std::abs(std::pow(norm_l2(f, g), 2) - exact));
  }
  for (std::size_t i = 1; i < hs.size(); ++i) {
    CHECK(std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]) >= 1.9);
  }
}

TEST_CASE("H1 norm examples") {
  CHECK(norm_h1(GridSpec::line(1.0, 17).constant(1.0), GridSpec::line(1.0, 17)) == doctest::Approx(1.0));
  CHECK(norm_h1(GridSpec::line(1.0, 17).zeros(), GridSpec::line(1.0, 17)) == 0.0);
  const GridSpec g = GridSpec::line(1.0, 201);
  Field x(g.node_count());
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = g.coordinate(0, static_cast<int>(n));
  CHECK(std::abs(norm_h1(x, g) - std::sqrt(1.0 / 3.0 + 1.0)) < 1e-3);
}

TEST_CASE("forward convolution") {
  const GridSpec g = GridSpec::line(1.0, 3);
  const TimeGrid tg(1.0, 10);
  const Series one(tg.levels(), g.constant(1.0));
  const Series c = convolve_forward(one, tg);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k][1] == doctest::Approx(tg.time(static_cast<int>(k))));
  CHECK(max_abs(convolve_forward(zeros_series(g, tg), tg)) == 0.0);

  const TimeGrid fine(1.0, 1000);
  Series t(fine.levels(), g.zeros());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = g.constant(fine.time(static_cast<int>(k)));
  const Series ct = convolve_forward(t, fine);
  CHECK(std::abs(ct.back()[0] - 0.5) < 1e-3);
  for (std::size_t k = 1; k + 1 < ct.size(); ++k) {
    CHECK(std::abs((ct[k + 1][0] - ct[k][0]) / fine.dt() - t[k][0]) < 2.0 * fine.dt());
  }
  CHECK_THROWS_AS(convolve_forward(Series(3, g.zeros()), tg), StructuralError);
}

TEST_CASE("backward convolution") {
  const GridSpec g = GridSpec::line(1.0, 3);
  const TimeGrid tg(2.0, 8);
  const Series one(tg.levels(), g.constant(1.0));
  const Series c = convolve_backward(one, tg);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k][0] == doctest::Approx(2.0 - tg.time(static_cast<int>(k))));

  Series v(tg.levels(), g.zeros());
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& f : v) {
    for (double& x : f) x = u(rng);
  }
  const Series f = convolve_forward(v, tg), b = convolve_backward(v, tg);
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(f[k][2] + b[k][2] - f.back()[2]) < 1e-12);

  const TimeGrid fine(1.0, 1000);
  Series t(fine.levels(), g.zeros());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = g.constant(fine.time(static_cast<int>(k)));
  CHECK(std::abs(convolve_backward(t, fine)[0][0] - 0.5) < 1e-3);
}

TEST_CASE("banded solver agrees with dense elimination") {
  for (const GridSpec& g : {GridSpec::line(1.0, 15), GridSpec::rectangle(1.0, 1.3, 6, 5)}) {
    const std::size_t n = g.node_count();
    Field diag = random_field(g, 7);
    for (double& d : diag) d = 2.0 + d;
    const double s = 0.3;
    const auto cols = dense_laplacian(g);
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i][j] = (i == j ? diag[i] : 0.0) - s * cols[j][i];
    }
    const Field rhs = random_field(g, 8);
    const Field x = BandedSpdSolver(g, diag, s).solve(rhs);
    const Field ref = dense_solve(a, rhs);
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    const Field back = apply_shifted_laplacian(g, diag, s, x);
    for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(rhs[i]).epsilon(1e-10));

    std::vector<char> fixed(n, 0);
    fixed[0] = fixed[n / 2] = 1;
    Field rhs_fixed = rhs;
    rhs_fixed[0] = 0.25;
    rhs_fixed[n / 2] = -0.5;
    auto af = a;
    Field bf = rhs_fixed;
    for (std::size_t i : {std::size_t{0}, n / 2}) {
      af[i].assign(n, 0.0);
      af[i][i] = 1.0;
    }
    const Field xf = BandedSpdSolver(g, diag, s, fixed).solve(rhs_fixed);
    const Field reff = dense_solve(af, bf);
    for (std::size_t i = 0; i < n; ++i) CHECK(xf[i] == doctest::Approx(reff[i]).epsilon(1e-10));
  }
}

TEST_CASE("banded solver reports an indefinite operator") {
  const GridSpec g = GridSpec::line(1.0, 9);
  CHECK_THROWS_AS(BandedSpdSolver(g, g.constant(-1.0), 0.1), SolverError);
}
