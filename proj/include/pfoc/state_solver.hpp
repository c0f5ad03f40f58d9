#pragma once

#include <span>
#include <utility>

#include "pfoc/geometry.hpp"
#include "pfoc/potentials.hpp"

namespace pfoc {

/// alpha, beta: Green-Naghdi flux coefficients; theta_c: critical temperature.
struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double theta_c = 1.0;

  void validate() const;
};

/// Observed strict bounds r_* <= phi0 <= r^* of the initial phase.
struct InteriorBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct InitialData {
  Field phi0;
  Field w0;
  Field v0;

  /// Checks sizes, finiteness and -1 < phi0 < 1; returns the observed (r_*, r^*).
  InteriorBounds validate(const GridSpec& grid) const;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 60;
};

struct PdasOptions {
  double c = 1.0;
  int max_iter = 100;
  double newton_tol = 1e-12;
};

struct SolverOptions {
  NewtonOptions newton;
  PdasOptions pdas;
};

/**
 * Phase field, thermal displacement, temperature v = dw/dt, and the selected
 * multiplier xi on levels 0..N. Completed trajectories are plain values.
 */
struct StateTrajectory {
  Series phi;
  Series w;
  Series v;
  Series xi;
  PotentialSpec potential;
  int newton_iterations = 0;
  int pdas_iterations = 0;

  double min_phi() const;
  double max_phi() const;
};

struct PhaseStep {
  Field phi;
  Field xi;
  int iterations = 0;
  double residual = 0.0;
};

/// Residual of the implicit phase step with the barrier term included.
Field phase_residual(std::span<const double> phi, std::span<const double> phi_prev,
                     std::span<const double> v_lag, const PotentialSpec& spec, const ModelParams& mp,
                     double dt, const GridSpec& grid);

/**
 * One implicit Euler step of the phase equation for the logarithmic family,
 * by damped Newton. The step length is halved until the iterate stays in
 * (-1 + 1e-14, 1 - 1e-14) and the residual norm decreases.
 */
PhaseStep step_phase(std::span<const double> phi_prev, std::span<const double> v_lag,
                     const PotentialSpec& spec, const ModelParams& mp, double dt, const GridSpec& grid,
                     const NewtonOptions& opts = {});

/// Implicit phase step for the double obstacle inclusion by primal-dual active sets.
PhaseStep step_phase_obstacle(std::span<const double> phi_prev, std::span<const double> v_lag,
                              const PotentialSpec& spec, const ModelParams& mp, double dt,
                              const GridSpec& grid, const PdasOptions& opts = {});

/**
 * Implicit step of the thermal pair:
 *   v+ = v + dt [ L(alpha v+ + beta w+) - F2'(phi+)(phi+ - phi)/dt + u ],  w+ = w + dt v+.
 * Eliminating w+ leaves one SPD solve with (1/dt) I - (alpha + beta dt) L.
 */
std::pair<Field, Field> step_thermal(std::span<const double> w_prev, std::span<const double> v_prev,
                                     std::span<const double> phi_new, std::span<const double> phi_prev,
                                     std::span<const double> u_slice, const PotentialSpec& spec,
                                     const ModelParams& mp, double dt, const GridSpec& grid);

/// Forward solve for the logarithmic family. Step k -> k+1 uses control level k.
StateTrajectory solve_state(const Series& u, const InitialData& init, const PotentialSpec& spec,
                            const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                            const SolverOptions& opts = {});

/// Forward solve for the double obstacle potential.
StateTrajectory solve_state_obstacle(const Series& u, const InitialData& init, const PotentialSpec& spec,
                                     const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                                     const SolverOptions& opts = {});

/// Dispatches on spec.kind.
StateTrajectory solve_state_any(const Series& u, const InitialData& init, const PotentialSpec& spec,
                                const ModelParams& mp, const TimeGrid& tg, const GridSpec& grid,
                                const SolverOptions& opts = {});

/// Discrete norms mirroring the uniform state bound (phi and w components).
struct StateNorms {
  double phi_linf_l2 = 0.0;
  double phi_linf_h1 = 0.0;
  double phi_h1_l2 = 0.0;
  double w_linf_h1 = 0.0;
  double v_linf_l2 = 0.0;
  double v_l2_h1 = 0.0;
  double v_linf = 0.0;
};

StateNorms state_norms(const StateTrajectory& traj, const GridSpec& grid, const TimeGrid& tg);

}  // namespace pfoc
