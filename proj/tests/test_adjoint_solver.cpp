#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "pfoc/adjoint_solver.hpp"
#include "pfoc/error.hpp"

using namespace pfoc;
using fixtures::coupled;
using fixtures::sample;

namespace {

StateTrajectory solve(const Problem& p) {
  Series u(p.time.levels(), sample(p.grid, [](double x) { return 0.3 * std::sin(2.0 * x); }));
  return solve_state(u, p.init, p.potential, p.model, p.time, p.grid);
}

double max_diff(const Series& a, const Series& b) { return max_abs(difference(a, b)); }

}  // namespace

TEST_CASE("source examples") {
  const GridSpec g = GridSpec::line(1.0, 5);
  const TimeGrid tg(2.0, 8);
  StateTrajectory s{zeros_series(g, tg), Series(tg.levels(), g.constant(2.0)), zeros_series(g, tg), {}, {}};
  ObjectiveSpec o = ObjectiveSpec::zero_targets(g, tg);
  o.k1 = o.k2 = o.k6 = 1.0;
  CHECK(max_abs(assemble_source(s, o, tg, g)) == 0.0);

  o = ObjectiveSpec::zero_targets(g, tg);
  o.k4 = 1.0;
  o.w_omega = g.constant(1.0);
  for (const auto& f : assemble_source(s, o, tg, g)) {
    for (double x : f) CHECK(x == 1.0);
  }

  o = ObjectiveSpec::zero_targets(g, tg);
  o.k3 = 1.0;
  o.w_q = Series(tg.levels(), g.constant(1.0));
  const Series f = assemble_source(s, o, tg, g);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(f[k][2] == doctest::Approx(2.0 - tg.time(static_cast<int>(k))).scale(1.0).epsilon(1e-14));
  }
}

TEST_CASE("zero data gives a zero adjoint") {
  Problem p = coupled();
  p.objective = ObjectiveSpec::zero_targets(p.grid, p.time);
  p.objective.ell = 1.0;
  const AdjointTrajectory a = solve_adjoint(solve(p), p.objective, p.model, p.time, p.grid);
  CHECK(max_abs(a.p) == 0.0);
  CHECK(max_abs(a.q) == 0.0);
  CHECK(max_abs(a.tail) == 0.0);
}

TEST_CASE("without coupling only the phase adjoint is driven") {
  Problem p = coupled(0.1, 33, 0.5, 50, 0.0);
  p.potential = PotentialSpec::logarithmic(0.1, 0.0);
  ObjectiveSpec o = ObjectiveSpec::zero_targets(p.grid, p.time);
  o.k1 = 1.0;
  o.phi_q = p.objective.phi_q;
  const AdjointTrajectory a = solve_adjoint(solve(p), o, p.model, p.time, p.grid);
  CHECK(max_abs(a.q) == 0.0);
  CHECK(max_abs(a.p) > 1e-3);
}

TEST_CASE("terminal conditions and the tail recurrence") {
  const Problem p = coupled();
  const StateTrajectory s = solve(p);
  const AdjointTrajectory a = solve_adjoint(s, p.objective, p.model, p.time, p.grid);
  const std::size_t last = p.time.levels() - 1;
  const ObjectiveSpec& o = p.objective;
  for (std::size_t n = 0; n < p.grid.node_count(); ++n) {
    const double dv = s.v[last][n] - (*o.wt_omega)[n];
    const double f2p = -2.0 * 0.5 * s.phi[last][n];
    CHECK(a.q[last][n] == doctest::Approx(o.k6 * dv).epsilon(1e-14));
    CHECK(a.p[last][n] == doctest::Approx(o.k2 * (s.phi[last][n] - o.phi_omega[n]) - o.k6 * f2p * dv).epsilon(1e-13));
    CHECK(a.tail[last][n] == 0.0);
  }
  for (std::size_t k = 0; k < last; ++k) {
    for (std::size_t n = 0; n < p.grid.node_count(); ++n) {
      CHECK(std::abs(a.tail[k][n] - a.tail[k + 1][n] - p.time.dt() * a.q[k][n]) <= 1e-14 * (1.0 + std::abs(a.tail[k][n])));
    }
  }
  const Series back = convolve_backward(a.q, p.time);
  CHECK(max_diff(back, a.tail) <= 1e-12);
}

TEST_CASE("adjoint is linear in the cost weights for a frozen state") {
  const Problem p = coupled();
  const StateTrajectory s = solve(p);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  auto weights = [&] {
    ObjectiveSpec o = p.objective;
    o.k1 = u(rng); o.k2 = u(rng); o.k3 = u(rng); o.k4 = u(rng); o.k5 = u(rng); o.k6 = u(rng);
    return o;
  };
  const ObjectiveSpec a = weights(), b = weights();
  ObjectiveSpec c = a;
  c.k1 += b.k1; c.k2 += b.k2; c.k3 += b.k3; c.k4 += b.k4; c.k5 += b.k5; c.k6 += b.k6;
  const AdjointTrajectory ya = solve_adjoint(s, a, p.model, p.time, p.grid);
  const AdjointTrajectory yb = solve_adjoint(s, b, p.model, p.time, p.grid);
  const AdjointTrajectory yc = solve_adjoint(s, c, p.model, p.time, p.grid);
  Series ps = ya.p, qs = ya.q;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (std::size_t n = 0; n < ps[k].size(); ++n) {
      ps[k][n] += yb.p[k][n];
      qs[k][n] += yb.q[k][n];
    }
  }
  CHECK(max_diff(ps, yc.p) <= 1e-10 * max_abs(yc.p));
  CHECK(max_diff(qs, yc.q) <= 1e-10 * max_abs(yc.q));
}

TEST_CASE("lambda pairing examples") {
  const GridSpec g = GridSpec::line(2.0, 9);
  const TimeGrid tg(0.5, 5);
  StateTrajectory s{zeros_series(g, tg), zeros_series(g, tg), zeros_series(g, tg), {}, {}};
  const AdjointTrajectory a{Series(tg.levels(), g.constant(1.5)), zeros_series(g, tg), zeros_series(g, tg)};
  CHECK(lambda_pairing(s, a, zeros_series(g, tg), 0.1, g, tg) == 0.0);
  const Series one(tg.levels(), g.constant(1.0));
  CHECK(lambda_pairing(s, a, one, 0.1, g, tg) == doctest::Approx(2.0 * 0.1 * 1.5 * 2.0 * 0.5).epsilon(1e-14));

  const Problem p = coupled();
  const StateTrajectory st = solve(p);
  const AdjointTrajectory adj = solve_adjoint(st, p.objective, p.model, p.time, p.grid);
  CHECK(lambda_pairing(st, adj, adj.p, p.potential.gamma, p.grid, p.time) >= 0.0);
}

TEST_CASE("adjoint guards") {
  const Problem p = coupled();
  StateTrajectory s = solve(p);
  s.potential = PotentialSpec::obstacle(0.5);
  CHECK_THROWS_AS(solve_adjoint(s, p.objective, p.model, p.time, p.grid), StructuralError);

  const GridSpec g = GridSpec::line(1.0, 5);
  const TimeGrid tg(10.0, 2);
  StateTrajectory flat{zeros_series(g, tg), zeros_series(g, tg), zeros_series(g, tg), {},
                       PotentialSpec::logarithmic(1e-3, 5.0)};
  CHECK_THROWS_AS(check_adjoint_step_size(flat, ModelParams{}, tg), SolverError);
  CHECK_NOTHROW(check_adjoint_step_size(flat, ModelParams{}, TimeGrid(10.0, 1000)));
}

TEST_CASE("adjoint norms stay bounded as gamma decreases") {
  Problem p = coupled();
  auto norms = [&](double gamma) {
    p.potential = PotentialSpec::logarithmic(gamma, 0.5);
    const StateTrajectory s = solve(p);
    return adjoint_norms(solve_adjoint(s, p.objective, p.model, p.time, p.grid), p.grid, p.time);
  };
  const AdjointNorms ref = norms(1.0);
  for (double gamma : {0.1, 0.01}) {
    const AdjointNorms a = norms(gamma);
    CHECK(a.p_linf_l2 <= 3.0 * ref.p_linf_l2);
    CHECK(a.p_l2_h1 <= 3.0 * ref.p_l2_h1);
    CHECK(a.q_linf_h1 <= 3.0 * ref.q_linf_h1);
    CHECK(a.q_h1_l2 <= 3.0 * ref.q_h1_l2);
  }
}
