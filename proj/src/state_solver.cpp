#include "pfoc/state_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfoc/banded.hpp"
#include "pfoc/error.hpp"

namespace pfoc {

namespace {

constexpr double kInteriorMargin = 1e-14;

// Coefficient of F2'(phi) in the phase equation: 2/theta_c - v/theta_c^2.
double coupling(double v, const ModelParams& mp) {
  return 2.0 / mp.theta_c - v / (mp.theta_c * mp.theta_c);
}

void check_inputs(std::span<const double> a, std::span<const double> b, const GridSpec& grid,
                  const char* what) {
  require_on_grid(a, grid, what);
  require_on_grid(b, grid, what);
}

// F2 contribution only; the obstacle step adds xi separately.
Field smooth_phase_residual(std::span<const double> phi, std::span<const double> phi_prev,
                            std::span<const double> v_lag, const PotentialSpec& spec,
                            const ModelParams& mp, double dt, const GridSpec& grid) {
  Field r = laplacian_neumann(phi, grid);
  for (std::size_t n = 0; n < r.size(); ++n) {
    r[n] = (phi[n] - phi_prev[n]) / dt - r[n] + coupling(v_lag[n], mp) * f2_derivs(phi[n], spec).first;
  }
  return r;
}

}  // namespace

void ModelParams::validate() const {
  if (!(alpha > 0.0 && std::isfinite(alpha))) throw DomainError("alpha must be positive");
  if (!(beta > 0.0 && std::isfinite(beta))) throw DomainError("beta must be positive");
  if (!(theta_c > 0.0 && std::isfinite(theta_c))) throw DomainError("theta_c must be positive");
}

InteriorBounds InitialData::validate(const GridSpec& grid) const {
  require_on_grid(phi0, grid, "phi0");
  require_on_grid(w0, grid, "w0");
  require_on_grid(v0, grid, "v0");
  for (const Field* f : {&phi0, &w0, &v0}) {
    for (double x : *f) {
      if (!std::isfinite(x)) throw DomainError("initial data must be finite");
    }
  }
  const auto [lo, hi] = std::minmax_element(phi0.begin(), phi0.end());
  if (!(*lo > -1.0 && *hi < 1.0)) {
    throw DomainError("phi0 must satisfy -1 < r_* <= phi0 <= r^* < 1; observed range [" +
                      std::to_string(*lo) + ", " + std::to_string(*hi) + "]");
  }
  return {*lo, *hi};
}

double StateTrajectory::min_phi() const {
  double m = 1.0;
  for (const auto& f : phi) m = std::min(m, *std::min_element(f.begin(), f.end()));
  return m;
}

double StateTrajectory::max_phi() const {
  double m = -1.0;
  for (const auto& f : phi) m = std::max(m, *std::max_element(f.begin(), f.end()));
  return m;
}

Field phase_residual(std::span<const double> phi, std::span<const double> phi_prev,
                     std::span<const double> v_lag, const PotentialSpec& spec, const ModelParams& mp,
                     double dt, const GridSpec& grid) {
  Field r = smooth_phase_residual(phi, phi_prev, v_lag, spec, mp, dt, grid);
  for (std::size_t n = 0; n < r.size(); ++n) r[n] += f1gamma_derivs(phi[n], spec.gamma).first;
  return r;
}

PhaseStep step_phase(std::span<const double> phi_prev, std::span<const double> v_lag,
                     const PotentialSpec& spec, const ModelParams& mp, double dt, const GridSpec& grid,
                     const NewtonOptions& opts) {
  if (!spec.is_logarithmic()) throw StructuralError("step_phase needs a logarithmic potential");
  check_inputs(phi_prev, v_lag, grid, "step_phase");
  const double bound = 1.0 - kInteriorMargin;
  if (max_abs(phi_prev) >= bound) throw DomainError("step_phase: previous phase is not strictly interior");

  PhaseStep out;
  out.phi.assign(phi_prev.begin(), phi_prev.end());
  Field r = phase_residual(out.phi, phi_prev, v_lag, spec, mp, dt, grid);
  double rn = norm_l2(r, grid);
  const std::size_t n = out.phi.size();
  Field diag(n);
  Field neg(n);

  auto newton_direction = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = 1.0 / dt + f1gamma_derivs(out.phi[i], spec.gamma).second +
                coupling(v_lag[i], mp) * f2_derivs(out.phi[i], spec).second;
      neg[i] = -r[i];
    }
    return BandedSpdSolver(grid, diag, 1.0).solve(neg);
  };

  // Damped iterations until the tolerance is met, then one polishing step so
  // the state is accurate to roundoff for finite-difference gradient checks.
  bool polished = false;
  while (true) {
    const bool converged = rn <= opts.tol;
    if (converged && polished) break;
    if (!converged && out.iterations >= opts.max_iter) {
      throw SolverError("phase Newton did not converge (residual " + std::to_string(rn) + ")", rn);
    }
    const Field delta = newton_direction();
    double t = 1.0;
    bool accepted = false;
    Field cand(n);
    const int halvings = converged ? 0 : opts.max_halvings;
    for (int h = 0; h <= halvings; ++h, t *= 0.5) {
      bool inside = true;
      for (std::size_t i = 0; i < n; ++i) {
        cand[i] = out.phi[i] + t * delta[i];
        if (!(std::abs(cand[i]) < bound)) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      Field rc = phase_residual(cand, phi_prev, v_lag, spec, mp, dt, grid);
      const double rcn = norm_l2(rc, grid);
      if (rcn < rn) {
        out.phi = cand;
        r = std::move(rc);
        rn = rcn;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (converged) {
      polished = true;
      continue;
    }
    if (!accepted) {
      throw SolverError("phase Newton: damping exhausted (residual " + std::to_string(rn) + ")", rn);
    }
  }
  out.residual = rn;
  out.xi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.xi[i] = f1gamma_derivs(out.phi[i], spec.gamma).first;
  return out;
}

PhaseStep step_phase_obstacle(std::span<const double> phi_prev, std::span<const double> v_lag,
                              const PotentialSpec& spec, const ModelParams& mp, double dt,
                              const GridSpec& grid, const PdasOptions& opts) {
  check_inputs(phi_prev, v_lag, grid, "step_phase_obstacle");
  const std::size_t n = phi_prev.size();
  PhaseStep out;
  out.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.phi[i] = obstacle_project(phi_prev[i]);
  out.xi.assign(n, 0.0);

  // Active-set test on the Jacobi-scaled system, so c is relative to the operator diagonal.
  const auto stencil = laplacian_stencil(grid);
  Field scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = 1.0 / dt - stencil[i][0].coeff + coupling(v_lag[i], mp) * f2_derivs(out.phi[i], spec).second;
    scale[i] = std::max(d, 1.0 / dt);
  }
  const double feas_tol = 1e-12;
  const double sign_tol = opts.newton_tol * (1.0 + 1.0 / dt);

  // -1: lower contact, +1: upper contact, 0: inactive
  std::vector<int> state(n, 0), prev_state(n, 2);
  Field diag(n), rhs(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double cs = opts.c * scale[i];
      if (out.xi[i] + cs * (out.phi[i] - 1.0) > 0.0) {
        state[i] = 1;
      } else if (out.xi[i] + cs * (out.phi[i] + 1.0) < 0.0) {
        state[i] = -1;
      } else {
        state[i] = 0;
      }
    }
    if (state == prev_state) {
      out.iterations = it;
      return out;
    }
    prev_state = state;

    std::vector<char> fixed(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] != 0) {
        fixed[i] = 1;
        out.phi[i] = static_cast<double>(state[i]);
      }
    }
    // Newton on the inactive nodes; exact in one step for quadratic F2.
    Field res = smooth_phase_residual(out.phi, phi_prev, v_lag, spec, mp, dt, grid);
    double rn = 0.0;
    for (int newton = 0; newton < 50; ++newton) {
      rn = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) rn = std::max(rn, std::abs(res[i]));
      }
      if (newton > 0 && rn <= opts.newton_tol * (1.0 + 1.0 / dt)) break;
      for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 1.0 / dt + coupling(v_lag[i], mp) * f2_derivs(out.phi[i], spec).second;
        rhs[i] = fixed[i] ? 0.0 : -res[i];
      }
      const Field delta = BandedSpdSolver(grid, diag, 1.0, fixed).solve(rhs);
      for (std::size_t i = 0; i < n; ++i) out.phi[i] += delta[i];
      res = smooth_phase_residual(out.phi, phi_prev, v_lag, spec, mp, dt, grid);
    }
    for (std::size_t i = 0; i < n; ++i) out.xi[i] = fixed[i] ? -res[i] : 0.0;
    out.residual = rn;

    // Degenerate contact (multiplier ~ 0 on the obstacle) can make the sets
    // oscillate; accept as soon as the iterate is feasible with signed multipliers.
    bool feasible = true;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      if (!fixed[i]) feasible = std::abs(out.phi[i]) <= 1.0 + feas_tol;
      else feasible = state[i] * out.xi[i] >= -sign_tol;
    }
    if (feasible) {
      for (std::size_t i = 0; i < n; ++i) {
        out.phi[i] = obstacle_project(out.phi[i]);
        if (fixed[i] && state[i] * out.xi[i] < 0.0) out.xi[i] = 0.0;
      }
      out.iterations = it + 1;
      return out;
    }
  }
  throw SolverError("primal-dual active set did not settle within " + std::to_string(opts.max_iter) +
                    " iterations");
}

std::pair<Field, Field> step_thermal(std::span<const double> w_prev, std::span<const double> v_prev,
                                     std::span<const double> phi_new, std::span<const double> phi_prev,
                                     std::span<const double> u_slice, const PotentialSpec& spec,
                                     const ModelParams& mp, double dt, const GridSpec& grid) {
  check_inputs(w_prev, v_prev, grid, "step_thermal");
  check_inputs(phi_new, phi_prev, grid, "step_thermal");
  require_on_grid(u_slice, grid, "step_thermal");
  const std::size_t n = w_prev.size();
  const Field diag(n, 1.0 / dt);
  const BandedSpdSolver solver(grid, diag, mp.alpha + mp.beta * dt);
  const Field lw = laplacian_neumann(w_prev, grid);
  Field rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = v_prev[i] / dt + mp.beta * lw[i] -
             f2_derivs(phi_new[i], spec).first * (phi_new[i] - phi_prev[i]) / dt + u_slice[i];
  }
  Field v_new = solver.solve(rhs);
  Field w_new(n);
  for (std::size_t i = 0; i < n; ++i) w_new[i] = w_prev[i] + dt * v_new[i];
  return {std::move(w_new), std::move(v_new)};
}

namespace {

template <typename PhaseStepper>
StateTrajectory march(const Series& u, const InitialData& init, const PotentialSpec& spec,
                      const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                      PhaseStepper&& phase_step) {
  spec.validate();
  mp.validate();
  init.validate(grid);
  require_levels(u, tg, grid, "control");
  const double dt = tg.dt();
  const std::size_t levels = tg.levels();

  StateTrajectory traj;
  traj.potential = spec;
  traj.phi.reserve(levels);
  traj.w.reserve(levels);
  traj.v.reserve(levels);
  traj.xi.reserve(levels);
  traj.phi.push_back(init.phi0);
  traj.w.push_back(init.w0);
  traj.v.push_back(init.v0);
  Field xi0(init.phi0.size(), 0.0);
  if (spec.is_logarithmic()) {
    for (std::size_t i = 0; i < xi0.size(); ++i) xi0[i] = f1gamma_derivs(init.phi0[i], spec.gamma).first;
  }
  traj.xi.push_back(std::move(xi0));

  for (std::size_t k = 0; k + 1 < levels; ++k) {
    try {
      PhaseStep ps = phase_step(traj.phi[k], traj.v[k], traj);
      auto [w_new, v_new] =
          step_thermal(traj.w[k], traj.v[k], ps.phi, traj.phi[k], u[k], spec, mp, dt, grid);
      traj.phi.push_back(std::move(ps.phi));
      traj.xi.push_back(std::move(ps.xi));
      traj.w.push_back(std::move(w_new));
      traj.v.push_back(std::move(v_new));
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " at time level " + std::to_string(k + 1),
                        e.last_residual());
    }
  }
  return traj;
}

}  // namespace

StateTrajectory solve_state(const Series& u, const InitialData& init, const PotentialSpec& spec,
                            const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                            const SolverOptions& opts) {
  if (!spec.is_logarithmic()) throw StructuralError("solve_state needs a logarithmic potential");
  return march(u, init, spec, mp, tg, grid,
               [&](const Field& phi_prev, const Field& v_lag, StateTrajectory& traj) {
                 PhaseStep ps = step_phase(phi_prev, v_lag, spec, mp, tg.dt(), grid, opts.newton);
                 traj.newton_iterations += ps.iterations;
                 return ps;
               });
}

StateTrajectory solve_state_obstacle(const Series& u, const InitialData& init, const PotentialSpec& spec,
                                     const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                                     const SolverOptions& opts) {
  PotentialSpec obstacle = spec;
  obstacle.kind = PotentialSpec::Kind::Obstacle;
  return march(u, init, obstacle, mp, tg, grid,
               [&](const Field& phi_prev, const Field& v_lag, StateTrajectory& traj) {
                 PhaseStep ps = step_phase_obstacle(phi_prev, v_lag, obstacle, mp, tg.dt(), grid, opts.pdas);
                 traj.pdas_iterations += ps.iterations;
                 return ps;
               });
}

StateTrajectory solve_state_any(const Series& u, const InitialData& init, const PotentialSpec& spec,
                                const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                                const SolverOptions& opts) {
  return spec.is_logarithmic() ? solve_state(u, init, spec, mp, tg, grid, opts)
                               : solve_state_obstacle(u, init, spec, mp, tg, grid, opts);
}

StateNorms state_norms(const StateTrajectory& traj, const GridSpec& grid, const TimeGrid& tg) {
  StateNorms s;
  s.phi_linf_l2 = norm_linf_l2(traj.phi, grid);
  s.phi_linf_h1 = norm_linf_h1(traj.phi, grid);
  s.phi_h1_l2 = norm_h1_l2(traj.phi, grid, tg);
  s.w_linf_h1 = norm_linf_h1(traj.w, grid);
  s.v_linf_l2 = norm_linf_l2(traj.v, grid);
  s.v_l2_h1 = norm_l2_h1(traj.v, grid, tg);
  s.v_linf = max_abs(traj.v);
  return s;
}

}  // namespace pfoc
