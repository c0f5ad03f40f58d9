#include "pfoc/objective.hpp"

#include <cmath>
#include <string>

#include "pfoc/adjoint_solver.hpp"
#include "pfoc/error.hpp"

namespace pfoc {

ObjectiveSpec ObjectiveSpec::zero_targets(const GridSpec& grid, const TimeGrid& tg) {
  ObjectiveSpec s;
  s.phi_q = zeros_series(grid, tg);
  s.w_q = zeros_series(grid, tg);
  s.wt_q = zeros_series(grid, tg);
  s.phi_omega = grid.zeros();
  s.w_omega = grid.zeros();
  s.wt_omega = grid.zeros();
  return s;
}

void ObjectiveSpec::validate(const GridSpec& grid, const TimeGrid& tg) const {
  for (double k : {k1, k2, k3, k4, k5, k6, ell}) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("objective weights must be finite and nonnegative");
  }
  if (k1 == 0.0 && k2 == 0.0 && k3 == 0.0 && k4 == 0.0 && k5 == 0.0 && k6 == 0.0 && ell == 0.0) {
    throw DomainError("objective weights k1..k6, ell must not all be zero");
  }
  require_levels(phi_q, tg, grid, "phi_Q");
  require_levels(w_q, tg, grid, "w_Q");
  require_levels(wt_q, tg, grid, "w'_Q");
  require_on_grid(phi_omega, grid, "phi_Omega");
  require_on_grid(w_omega, grid, "w_Omega");
  if (k6 > 0.0) {
    if (!wt_omega) throw DomainError("k6 > 0 requires a target w'_Omega with a finite H1 norm");
    require_on_grid(*wt_omega, grid, "w'_Omega");
    if (!std::isfinite(norm_h1(*wt_omega, grid))) throw DomainError("w'_Omega must have a finite H1 norm");
  } else if (wt_omega) {
    require_on_grid(*wt_omega, grid, "w'_Omega");
  }
}

ControlField ControlField::constant(const GridSpec& grid, const TimeGrid& tg, double value, double lower,
                                    double upper) {
  return {Series(tg.levels(), grid.constant(value)), Series(tg.levels(), grid.constant(lower)),
          Series(tg.levels(), grid.constant(upper))};
}

void ControlField::validate(const GridSpec& grid, const TimeGrid& tg, bool require_admissible) const {
  require_levels(values, tg, grid, "control");
  require_levels(lower, tg, grid, "control lower bound");
  require_levels(upper, tg, grid, "control upper bound");
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (std::size_t n = 0; n < values[k].size(); ++n) {
      if (!(lower[k][n] <= upper[k][n])) {
        throw DomainError("control bounds violate u_* <= u^* at level " + std::to_string(k));
      }
      if (require_admissible && !(values[k][n] >= lower[k][n] && values[k][n] <= upper[k][n])) {
        throw DomainError("control leaves the admissible box at level " + std::to_string(k));
      }
    }
  }
}

namespace {

double squared_distance_q(const Series& a, const Series& b, const GridSpec& grid, const TimeGrid& tg,
                          TimeRule rule) {
  const double n = norm_q(difference(a, b), grid, tg, rule);
  return n * n;
}

double squared_distance(const Field& a, const Field& b, const GridSpec& grid) {
  Field d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return inner_product_l2(d, d, grid);
}

}  // namespace

CostTerms cost_terms(const StateTrajectory& traj, const Series& u, const ObjectiveSpec& spec,
                     const GridSpec& grid, const TimeGrid& tg) {
  require_levels(traj.phi, tg, grid, "state phi");
  require_levels(u, tg, grid, "control");
  constexpr auto state_rule = TimeRule::StateRightRectangle;
  const std::size_t last = tg.levels() - 1;
  CostTerms c;
  if (spec.k1 != 0.0) c.phi_tracking = 0.5 * spec.k1 * squared_distance_q(traj.phi, spec.phi_q, grid, tg, state_rule);
  if (spec.k2 != 0.0) c.phi_terminal = 0.5 * spec.k2 * squared_distance(traj.phi[last], spec.phi_omega, grid);
  if (spec.k3 != 0.0) c.w_tracking = 0.5 * spec.k3 * squared_distance_q(traj.w, spec.w_q, grid, tg, state_rule);
  if (spec.k4 != 0.0) c.w_terminal = 0.5 * spec.k4 * squared_distance(traj.w[last], spec.w_omega, grid);
  if (spec.k5 != 0.0) c.wt_tracking = 0.5 * spec.k5 * squared_distance_q(traj.v, spec.wt_q, grid, tg, state_rule);
  if (spec.k6 != 0.0) {
    c.wt_terminal = 0.5 * spec.k6 * squared_distance(traj.v[last], spec.wt_omega_or_zero(grid), grid);
  }
  if (spec.ell != 0.0) {
    const double nu = norm_q(u, grid, tg, TimeRule::ControlLeftRectangle);
    c.control = 0.5 * spec.ell * nu * nu;
  }
  return c;
}

double evaluate_cost(const StateTrajectory& traj, const Series& u, const ObjectiveSpec& spec,
                     const GridSpec& grid, const TimeGrid& tg) {
  return cost_terms(traj, u, spec, grid, tg).total();
}

double evaluate_adapted_cost(const StateTrajectory& traj, const Series& u, const ObjectiveSpec& spec,
                             const Series& u_bar, const GridSpec& grid, const TimeGrid& tg) {
  require_levels(u_bar, tg, grid, "adapted anchor");
  return evaluate_cost(traj, u, spec, grid, tg) +
         0.5 * squared_distance_q(u, u_bar, grid, tg, TimeRule::ControlLeftRectangle);
}

Series reduced_gradient(const AdjointTrajectory& adj, const Series& u, const ObjectiveSpec& spec,
                        const Series* adapted_to) {
  if (adj.q.size() != u.size()) throw StructuralError("reduced_gradient: level count mismatch");
  if (adapted_to && adapted_to->size() != u.size()) throw StructuralError("reduced_gradient: anchor mismatch");
  Series g(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (adj.q[k].size() != u[k].size()) throw StructuralError("reduced_gradient: node count mismatch");
    g[k].resize(u[k].size());
    for (std::size_t n = 0; n < u[k].size(); ++n) {
      double v = adj.q[k][n] + spec.ell * u[k][n];
      if (adapted_to) v += u[k][n] - (*adapted_to)[k][n];
      g[k][n] = v;
    }
  }
  return g;
}

}  // namespace pfoc
