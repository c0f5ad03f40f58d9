#include "pfoc/adjoint_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfoc/banded.hpp"
#include "pfoc/error.hpp"

namespace pfoc {

namespace {

double inv_theta2(const ModelParams& mp) { return 1.0 / (mp.theta_c * mp.theta_c); }

// Zeroth-order coefficient of the p-equation at phase value `phi` with lagged temperature `v`.
double p_coefficient(double phi, double v, const PotentialSpec& pot, const ModelParams& mp) {
  const double f2pp = f2_derivs(phi, pot).second;
  return f1gamma_derivs(phi, pot.gamma).second + (2.0 / mp.theta_c - v * inv_theta2(mp)) * f2pp;
}

}  // namespace

Series assemble_source(const StateTrajectory& traj, const ObjectiveSpec& spec, const TimeGrid& tg,
                       const GridSpec& grid) {
  require_levels(traj.w, tg, grid, "state w");
  const std::size_t levels = tg.levels();
  const std::size_t last = levels - 1;
  const std::size_t nn = grid.node_count();
  const double dt = tg.dt();
  Series f(levels, Field(nn, 0.0));

  Field tail(nn, 0.0);  // dt * sum_{m=k+1}^{N} (w_m - w_Q,m)
  for (std::size_t k = levels; k-- > 0;) {
    const std::size_t next = std::min(k + 1, last);
    for (std::size_t n = 0; n < nn; ++n) {
      double val = 0.0;
      if (spec.k3 != 0.0) val += spec.k3 * tail[n];
      if (spec.k5 != 0.0) val += spec.k5 * (traj.v[next][n] - spec.wt_q[next][n]);
      if (spec.k4 != 0.0) val += spec.k4 * (traj.w[last][n] - spec.w_omega[n]);
      f[k][n] = val;
    }
    for (std::size_t n = 0; n < nn; ++n) tail[n] += dt * (traj.w[k][n] - spec.w_q[k][n]);
  }
  return f;
}

AdjointLevel adjoint_terminal(const StateTrajectory& traj, const ObjectiveSpec& spec, const GridSpec& grid) {
  const std::size_t last = traj.phi.size() - 1;
  const std::size_t nn = grid.node_count();
  const Field wt = spec.wt_omega_or_zero(grid);
  AdjointLevel t{Field(nn, 0.0), Field(nn, 0.0), Field(nn, 0.0)};
  for (std::size_t n = 0; n < nn; ++n) {
    const double dv = traj.v[last][n] - wt[n];
    const double f2p = f2_derivs(traj.phi[last][n], traj.potential).first;
    t.q[n] = spec.k6 * dv;
    t.p[n] = spec.k2 * (traj.phi[last][n] - spec.phi_omega[n]) - spec.k6 * f2p * dv;
  }
  return t;
}

AdjointLevel step_adjoint_backward(const AdjointLevel& next, const AdjointStepSlices& s,
                                   const ObjectiveSpec& spec, const PotentialSpec& pot, const ModelParams& mp,
                                   double dt, const GridSpec& grid) {
  const std::size_t nn = grid.node_count();
  for (auto f : {s.phi_k, s.phi_k1, s.phi_k2, s.v_k, s.source_k, s.phi_target_k1}) {
    require_on_grid(f, grid, "step_adjoint_backward");
  }
  const double b = inv_theta2(mp);

  // q-equation: ((1/dt) - (alpha + beta dt) L) q = f + q_next/dt + beta L tail_next + b F2'(phi_{k+2}) p_next
  const Field ltail = laplacian_neumann(next.tail, grid);
  Field rhs(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    double r = s.source_k[n] + next.q[n] / dt + mp.beta * ltail[n];
    if (s.couple_next_phase) r += b * f2_derivs(s.phi_k2[n], pot).first * next.p[n];
    rhs[n] = r;
  }
  const Field qdiag(nn, 1.0 / dt);
  AdjointLevel out;
  out.q = BandedSpdSolver(grid, qdiag, mp.alpha + mp.beta * dt).solve(rhs);
  out.tail.resize(nn);
  for (std::size_t n = 0; n < nn; ++n) out.tail[n] = next.tail[n] + dt * out.q[n];

  // p-equation: ((1/dt) + c - L) p = k1 (phi_{k+1} - phi_Q) + p_next/dt
  //             - [F2'(phi_{k+1}) q - F2'(phi_{k+2}) q_next]/dt - F2''(phi_{k+1}) (phi_{k+1} - phi_k)/dt q
  Field pdiag(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    const Derivs f2 = f2_derivs(s.phi_k1[n], pot);
    const double f2p_next = f2_derivs(s.phi_k2[n], pot).first;
    pdiag[n] = 1.0 / dt + p_coefficient(s.phi_k1[n], s.v_k[n], pot, mp);
    double r = next.p[n] / dt;
    if (spec.k1 != 0.0) r += spec.k1 * (s.phi_k1[n] - s.phi_target_k1[n]);
    r -= (f2.first * out.q[n] - f2p_next * next.q[n]) / dt;
    r -= f2.second * (s.phi_k1[n] - s.phi_k[n]) / dt * out.q[n];
    rhs[n] = r;
  }
  out.p = BandedSpdSolver(grid, pdiag, 1.0).solve(rhs);
  return out;
}

void check_adjoint_step_size(const StateTrajectory& traj, const ModelParams& mp, const TimeGrid& tg) {
  const double inv_dt = 1.0 / tg.dt();
  for (std::size_t k = 0; k + 1 < traj.phi.size(); ++k) {
    for (std::size_t n = 0; n < traj.phi[k + 1].size(); ++n) {
      const double d = inv_dt + p_coefficient(traj.phi[k + 1][n], traj.v[k][n], traj.potential, mp);
      if (!(d > 0.0)) {
        throw SolverError("adjoint p-equation loses definiteness at level " + std::to_string(k) +
                              ": reduce dt below 1/max(-(F1'' + (2/theta_c - v/theta_c^2) F2''))",
                          d);
      }
    }
  }
}

AdjointTrajectory solve_adjoint(const StateTrajectory& traj, const ObjectiveSpec& spec, const ModelParams& mp,
                                const TimeGrid& tg, const GridSpec& grid) {
  if (!traj.potential.is_logarithmic()) {
    throw StructuralError("solve_adjoint needs a trajectory of the logarithmic family");
  }
  mp.validate();
  spec.validate(grid, tg);
  require_levels(traj.phi, tg, grid, "state phi");
  require_levels(traj.v, tg, grid, "state v");
  check_adjoint_step_size(traj, mp, tg);

  const std::size_t levels = tg.levels();
  const std::size_t last = levels - 1;
  const double dt = tg.dt();
  const Series source = assemble_source(traj, spec, tg, grid);

  AdjointTrajectory adj;
  adj.p.resize(levels);
  adj.q.resize(levels);
  adj.tail.resize(levels);
  AdjointLevel cur = adjoint_terminal(traj, spec, grid);
  adj.p[last] = cur.p;
  adj.q[last] = cur.q;
  adj.tail[last] = cur.tail;

  for (std::size_t k = last; k-- > 0;) {
    AdjointStepSlices s;
    s.phi_k = traj.phi[k];
    s.phi_k1 = traj.phi[k + 1];
    s.phi_k2 = traj.phi[std::min(k + 2, last)];
    s.v_k = traj.v[k];
    s.source_k = source[k];
    s.phi_target_k1 = spec.phi_q[k + 1];
    s.couple_next_phase = k + 2 <= last;
    cur = step_adjoint_backward(cur, s, spec, traj.potential, mp, dt, grid);
    adj.p[k] = cur.p;
    adj.q[k] = cur.q;
    adj.tail[k] = cur.tail;
  }
  return adj;
}

double lambda_pairing(const StateTrajectory& traj, const AdjointTrajectory& adj, const Series& test,
                      double gamma, const GridSpec& grid, const TimeGrid& tg) {
  require_levels(test, tg, grid, "lambda test field");
  require_levels(adj.p, tg, grid, "adjoint p");
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < tg.levels(); ++k) {
    double level = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
      level += w[n] * f1gamma_derivs(traj.phi[k + 1][n], gamma).second * adj.p[k][n] * test[k][n];
    }
    acc += tg.dt() * level;
  }
  return acc;
}

AdjointNorms adjoint_norms(const AdjointTrajectory& adj, const GridSpec& grid, const TimeGrid& tg) {
  AdjointNorms a;
  a.p_linf_l2 = norm_linf_l2(adj.p, grid);
  a.p_l2_h1 = norm_l2_h1(adj.p, grid, tg);
  a.q_linf_h1 = norm_linf_h1(adj.q, grid);
  a.q_h1_l2 = norm_h1_l2(adj.q, grid, tg);
  return a;
}

}  // namespace pfoc
