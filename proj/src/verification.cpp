#include "pfoc/verification.hpp"

#include <array>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "pfoc/deep_quench.hpp"
#include "pfoc/error.hpp"
#include "pfoc/parallel.hpp"

namespace pfoc {

namespace {

Series shifted(const Series& u, double h, const Series& d) {
  Series out = u;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t n = 0; n < out[k].size(); ++n) out[k][n] += h * d[k][n];
  }
  return out;
}

}  // namespace

double fd_directional_derivative(const ReducedObjective& objective, const Series& u, const Series& direction,
                                 double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  return (objective.cost(shifted(u, h, direction)) - objective.cost(shifted(u, -h, direction))) / (2.0 * h);
}

TaylorReport taylor_order(const ReducedObjective& objective, const Series& u, const Series& direction,
                          const Series& gradient, const std::vector<double>& steps, const GridSpec& grid,
                          const TimeGrid& tg, int threads) {
  TaylorReport r;
  r.steps = steps;
  r.derivative = inner_product_q(gradient, direction, grid, tg, TimeRule::ControlLeftRectangle);
  const double base = objective.cost(u);
  const auto costs =
      parallel_map(steps.size(), threads, [&](std::size_t i) { return objective.cost(shifted(u, steps[i], direction)); });
  for (std::size_t i = 0; i < steps.size(); ++i) {
    r.remainders.push_back(std::abs(costs[i] - base - steps[i] * r.derivative));
  }
  r.order = loglog_slope(r.steps, r.remainders);
  return r;
}

std::vector<double> halving_steps(double h0, int count) {
  std::vector<double> h;
  for (int i = 0; i < count; ++i) h.push_back(std::ldexp(h0, -i));
  return h;
}

Series random_direction(const GridSpec& grid, const TimeGrid& tg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Series d = zeros_series(grid, tg);
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    for (double& x : d[k]) x = normal(rng);
  }
  const double nrm = norm_q(d, grid, tg, TimeRule::ControlLeftRectangle);
  for (auto& f : d) {
    for (double& x : f) x /= nrm;
  }
  return d;
}

Series random_field(const GridSpec& grid, const TimeGrid& tg, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  Series d = zeros_series(grid, tg);
  for (auto& f : d) {
    for (double& x : f) x = uni(rng);
  }
  return d;
}

std::vector<double> scalar_ode_reference(double phi0, double gamma, const TimeGrid& tg) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  if (!(std::abs(phi0) < 1.0)) throw DomainError("scalar ODE needs |phi0| < 1");
  std::vector<double> times(tg.levels());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = tg.time(static_cast<int>(k));
  std::vector<double> out;
  out.reserve(times.size());
  State x{phi0};
  auto rhs = [gamma](const State& s, State& ds, double) { ds[0] = -gamma * std::log((1.0 + s[0]) / (1.0 - s[0])); };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-12, 1e-12);
  odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), tg.dt() / 16.0,
                          [&out](const State& s, double) { out.push_back(s[0]); });
  return out;
}

OdeStudy scalar_ode_study(double phi0, double gamma, double horizon, const std::vector<int>& steps, int nodes) {
  OdeStudy study;
  const GridSpec grid = GridSpec::line(1.0, nodes);
  std::vector<double> dts;
  for (int n : steps) {
    const TimeGrid tg(horizon, n);
    const InitialData init{grid.constant(phi0), grid.zeros(), grid.zeros()};
    const StateTrajectory s =
        solve_state(zeros_series(grid, tg), init, PotentialSpec::logarithmic(gamma, 0.0), ModelParams{}, tg, grid);
    const std::vector<double> ref = scalar_ode_reference(phi0, gamma, tg);
    double err = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      for (double x : s.phi[k]) err = std::max(err, std::abs(x - ref[k]));
    }
    study.steps.push_back(n);
    study.errors.push_back(err);
    dts.push_back(tg.dt());
  }
  if (study.errors.size() >= 2) study.slope = loglog_slope(dts, study.errors);
  return study;
}

}  // namespace pfoc
