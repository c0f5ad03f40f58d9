#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pfoc/error.hpp"
#include "pfoc/verification.hpp"

using namespace pfoc;
using fixtures::coupled;

TEST_CASE("step sequences and random fields") {
  const auto h = halving_steps(1e-2, 4);
  REQUIRE(h.size() == 4);
  CHECK(h[0] == 1e-2);
  CHECK(h[3] == 1e-2 / 8.0);

  const GridSpec g = GridSpec::line(1.0, 9);
  const TimeGrid tg(1.0, 7);
  const Series d = random_direction(g, tg, 5);
  CHECK(norm_q(d, g, tg, TimeRule::ControlLeftRectangle) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs(d.back()) == 0.0);
  CHECK(random_direction(g, tg, 5) == d);
  CHECK(random_direction(g, tg, 6) != d);
  const Series f = random_field(g, tg, -0.5, 0.25, 3);
  for (const auto& level : f) {
    for (double x : level) {
      CHECK(x >= -0.5);
      CHECK(x <= 0.25);
    }
  }
}

TEST_CASE("finite-difference derivative examples") {
  Problem p = coupled();
  p.objective = ObjectiveSpec::zero_targets(p.grid, p.time);
  p.objective.ell = 0.7;
  const LogarithmicObjective obj(p);
  const Series u = random_field(p.grid, p.time, -0.5, 0.5, 1);
  CHECK(fd_directional_derivative(obj, u, zeros_series(p.grid, p.time), 1e-3) == 0.0);
  const Series d = random_direction(p.grid, p.time, 2);
  const double exact = 0.7 * inner_product_q(u, d, p.grid, p.time, TimeRule::ControlLeftRectangle);
  CHECK(fd_directional_derivative(obj, u, d, 1e-3) == doctest::Approx(exact).epsilon(1e-9));
  CHECK_THROWS_AS(fd_directional_derivative(obj, u, d, 0.0), DomainError);
}

TEST_CASE("finite differences agree with the adjoint gradient") {
  const Problem p = coupled();
  const LogarithmicObjective obj(p);
  const Series u = random_field(p.grid, p.time, -0.5, 0.5, 3);
  const Series d = random_direction(p.grid, p.time, 4);
  const Evaluation e = obj.evaluate(u);
  const double adj = inner_product_q(e.gradient, d, p.grid, p.time, TimeRule::ControlLeftRectangle);
  CHECK(fd_directional_derivative(obj, u, d, 1e-4) == doctest::Approx(adj).epsilon(1e-6));
}

TEST_CASE("taylor test separates the exact and a perturbed gradient") {
  const Problem p = coupled();
  const LogarithmicObjective obj(p);
  const Series u = random_field(p.grid, p.time, -0.5, 0.5, 7);
  const Series d = random_direction(p.grid, p.time, 8);
  const Evaluation e = obj.evaluate(u);
  const auto steps = halving_steps(1e-5, 6);
  const TaylorReport good = taylor_order(obj, u, d, e.gradient, steps, p.grid, p.time, 2);
  CHECK(good.order >= 1.9);
  Series bad = e.gradient;
  for (auto& f : bad) {
    for (double& x : f) x *= 1.01;
  }
  const TaylorReport off = taylor_order(obj, u, d, bad, steps, p.grid, p.time, 2);
  CHECK(off.order < 1.2);
  const TaylorReport serial = taylor_order(obj, u, d, e.gradient, steps, p.grid, p.time, 1);
  CHECK(serial.remainders == good.remainders);
}

TEST_CASE("scalar ODE reference") {
  const TimeGrid tg(2.0, 20);
  for (double x : scalar_ode_reference(0.0, 0.1, tg)) CHECK(x == 0.0);
  const auto up = scalar_ode_reference(0.5, 0.1, tg);
  const auto down = scalar_ode_reference(-0.5, 0.1, tg);
  REQUIRE(up.size() == tg.levels());
  CHECK(up[0] == 0.5);
  for (std::size_t k = 1; k < up.size(); ++k) {
    CHECK(up[k] < up[k - 1]);
    CHECK(up[k] > 0.0);
    CHECK(down[k] == doctest::Approx(-up[k]).epsilon(1e-14));
  }
  // Separable closed form near zero is not elementary; compare with a fine explicit midpoint run.
  double x = 0.5;
  const int sub = 200000;
  const double h = 2.0 / sub;
  for (int i = 0; i < sub; ++i) {
    auto f = [](double r) { return -0.1 * std::log((1.0 + r) / (1.0 - r)); };
    x += h * f(x + 0.5 * h * f(x));
  }
  CHECK(up.back() == doctest::Approx(x).epsilon(1e-9));
  CHECK_THROWS_AS(scalar_ode_reference(1.0, 0.1, tg), DomainError);
}

TEST_CASE("state solver converges to the ODE at first order") {
  const OdeStudy s = scalar_ode_study(0.5, 0.1, 1.0, {20, 40, 80, 160});
  CHECK(s.slope >= 0.9);
  CHECK(s.slope <= 1.1);
  for (std::size_t i = 1; i < s.errors.size(); ++i) CHECK(s.errors[i] < s.errors[i - 1]);
}

TEST_CASE("the ODE oracle detects a wrong barrier strength") {
  const GridSpec g = GridSpec::line(1.0, 5);
  std::vector<double> errs;
  for (int n : {40, 160}) {
    const TimeGrid tg(1.0, n);
    const InitialData init{g.constant(0.5), g.zeros(), g.zeros()};
    const StateTrajectory s =
        solve_state(zeros_series(g, tg), init, PotentialSpec::logarithmic(0.11), ModelParams{}, tg, g);
    const auto ref = scalar_ode_reference(0.5, 0.1, tg);
    double err = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) err = std::max(err, std::abs(s.phi[k][0] - ref[k]));
    errs.push_back(err);
  }
  CHECK(std::log(errs[0] / errs[1]) / std::log(4.0) < 0.5);
}
