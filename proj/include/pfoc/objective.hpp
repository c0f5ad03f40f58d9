#pragma once

#include <optional>

#include "pfoc/geometry.hpp"
#include "pfoc/state_solver.hpp"

namespace pfoc {

struct AdjointTrajectory;

/**
 * Weights and tracking targets of the cost functional
 *
 *   J = k1/2 |phi - phi_Q|^2_Q + k2/2 |phi(T) - phi_Omega|^2 + k3/2 |w - w_Q|^2_Q
 *     + k4/2 |w(T) - w_Omega|^2 + k5/2 |w_t - w'_Q|^2_Q + k6/2 |w_t(T) - w'_Omega|^2
 *     + ell/2 |u|^2_Q.
 *
 * Space-time targets carry N+1 levels, terminal targets are spatial fields.
 */
struct ObjectiveSpec {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0, k5 = 0.0, k6 = 0.0;
  double ell = 0.0;
  Series phi_q;
  Series w_q;
  Series wt_q;
  Field phi_omega;
  Field w_omega;
  std::optional<Field> wt_omega;

  /// Zero targets on the given grids.
  static ObjectiveSpec zero_targets(const GridSpec& grid, const TimeGrid& tg);

  void validate(const GridSpec& grid, const TimeGrid& tg) const;

  Field wt_omega_or_zero(const GridSpec& grid) const { return wt_omega ? *wt_omega : grid.zeros(); }
};

/// Space-time control with pointwise box bounds.
struct ControlField {
  Series values;
  Series lower;
  Series upper;

  static ControlField constant(const GridSpec& grid, const TimeGrid& tg, double value, double lower,
                               double upper);

  /// Throws when lower > upper somewhere, or (if `require_admissible`) when values leave the box.
  void validate(const GridSpec& grid, const TimeGrid& tg, bool require_admissible = true) const;

  ControlField with_values(Series v) const { return {std::move(v), lower, upper}; }
};

/// Breakdown of J into its seven terms.
struct CostTerms {
  double phi_tracking = 0.0;
  double phi_terminal = 0.0;
  double w_tracking = 0.0;
  double w_terminal = 0.0;
  double wt_tracking = 0.0;
  double wt_terminal = 0.0;
  double control = 0.0;

  double total() const {
    return phi_tracking + phi_terminal + w_tracking + w_terminal + wt_tracking + wt_terminal + control;
  }
};

CostTerms cost_terms(const StateTrajectory& traj, const Series& u, const ObjectiveSpec& spec,
                     const GridSpec& grid, const TimeGrid& tg);

double evaluate_cost(const StateTrajectory& traj, const Series& u, const ObjectiveSpec& spec,
                     const GridSpec& grid, const TimeGrid& tg);

/// J + 1/2 |u - u_bar|^2_Q
double evaluate_adapted_cost(const StateTrajectory& traj, const Series& u, const ObjectiveSpec& spec,
                             const Series& u_bar, const GridSpec& grid, const TimeGrid& tg);

/// Nodewise q + ell u (+ (u - u_bar) when adapted): gradient of the reduced cost
/// with respect to the control inner product.
Series reduced_gradient(const AdjointTrajectory& adj, const Series& u, const ObjectiveSpec& spec,
                        const Series* adapted_to = nullptr);

}  // namespace pfoc
