#pragma once

#include <span>

#include "pfoc/geometry.hpp"
#include "pfoc/objective.hpp"
#include "pfoc/state_solver.hpp"

namespace pfoc {

/**
 * Adjoint fields p, q and the tail integral tail[k] = dt * sum_{j>=k, j<N} q[j].
 *
 * Level N holds the terminal conditions. Level k < N carries the multiplier of
 * the forward step k -> k+1, which is also the step driven by control level k,
 * so the reduced gradient is q[k] + ell u[k] nodewise.
 */
struct AdjointTrajectory {
  Series p;
  Series q;
  Series tail;
};

/// p, q and tail at one time level.
struct AdjointLevel {
  Field p;
  Field q;
  Field tail;
};

/**
 * State data entering backward step k:
 * phi_k, phi_k1 = phi_{k+1}, phi_k2 = phi_{min(k+2, N)}, v_k,
 * the q-source at level k, and the phase target at level k+1.
 * `couple_next_phase` is false only for the first backward step (k = N-1),
 * where no later phase step exists.
 */
struct AdjointStepSlices {
  std::span<const double> phi_k;
  std::span<const double> phi_k1;
  std::span<const double> phi_k2;
  std::span<const double> v_k;
  std::span<const double> source_k;
  std::span<const double> phi_target_k1;
  bool couple_next_phase = true;
};

/**
 * Source of the q-equation, f = k3 (1 (*) (w - w_Q)) + k5 (w_t - w'_Q) + k4 (w(T) - w_Omega).
 * At level k the tail integral sums levels k+1..N (implicit state levels) and
 * the k5 term samples level k+1; level N uses level N.
 */
Series assemble_source(const StateTrajectory& traj, const ObjectiveSpec& spec, const TimeGrid& tg,
                       const GridSpec& grid);

/// Terminal conditions for p and q at level N.
AdjointLevel adjoint_terminal(const StateTrajectory& traj, const ObjectiveSpec& spec, const GridSpec& grid);

/**
 * One backward step: the q-equation first (implicit in q and in the memory
 * term through tail[k] = tail[k+1] + dt q[k]), then the p-equation using the
 * fresh q[k].
 */
AdjointLevel step_adjoint_backward(const AdjointLevel& next, const AdjointStepSlices& s,
                                   const ObjectiveSpec& spec, const PotentialSpec& pot, const ModelParams& mp,
                                   double dt, const GridSpec& grid);

/// Checks that every p-equation matrix is positive definite for the given trajectory.
void check_adjoint_step_size(const StateTrajectory& traj, const ModelParams& mp, const TimeGrid& tg);

AdjointTrajectory solve_adjoint(const StateTrajectory& traj, const ObjectiveSpec& spec, const ModelParams& mp,
                                const TimeGrid& tg, const GridSpec& grid);

/// <Lambda_gamma, test> = int_Q F1,gamma''(phi) p test, with p[k] paired with phi_{k+1}.
double lambda_pairing(const StateTrajectory& traj, const AdjointTrajectory& adj, const Series& test,
                      double gamma, const GridSpec& grid, const TimeGrid& tg);

struct AdjointNorms {
  double p_linf_l2 = 0.0;
  double p_l2_h1 = 0.0;
  double q_linf_h1 = 0.0;
  double q_h1_l2 = 0.0;
};

AdjointNorms adjoint_norms(const AdjointTrajectory& adj, const GridSpec& grid, const TimeGrid& tg);

}  // namespace pfoc
