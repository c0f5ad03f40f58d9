#include "pfoc/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "pfoc/error.hpp"

namespace pfoc {

LogarithmicObjective::LogarithmicObjective(const Problem& problem, std::optional<Series> anchor)
    : problem_(problem), anchor_(std::move(anchor)) {
  if (!problem_.potential.is_logarithmic()) {
    throw StructuralError("LogarithmicObjective needs a logarithmic potential");
  }
}

StateTrajectory LogarithmicObjective::state(const Series& u) const {
  const Problem& p = problem_;
  return solve_state(u, p.init, p.potential, p.model, p.time, p.grid, p.solver);
}

double LogarithmicObjective::cost(const Series& u) const {
  const Problem& p = problem_;
  const StateTrajectory traj = state(u);
  if (anchor_) return evaluate_adapted_cost(traj, u, p.objective, *anchor_, p.grid, p.time);
  return evaluate_cost(traj, u, p.objective, p.grid, p.time);
}

Evaluation LogarithmicObjective::evaluate(const Series& u) const {
  const Problem& p = problem_;
  Evaluation e;
  e.state = state(u);
  e.cost = anchor_ ? evaluate_adapted_cost(e.state, u, p.objective, *anchor_, p.grid, p.time)
                   : evaluate_cost(e.state, u, p.objective, p.grid, p.time);
  e.adjoint = solve_adjoint(e.state, p.objective, p.model, p.time, p.grid);
  e.gradient = reduced_gradient(e.adjoint, u, p.objective, anchor_ ? &*anchor_ : nullptr);
  return e;
}

ObstacleSurrogateObjective::ObstacleSurrogateObjective(const Problem& problem, double surrogate_gamma)
    : problem_(problem),
      surrogate_(problem.with_potential(PotentialSpec::logarithmic(surrogate_gamma, problem.potential.f2_coefficient))) {
  surrogate_.potential.custom_f2 = problem.potential.custom_f2;
}

double ObstacleSurrogateObjective::cost(const Series& u) const {
  const Problem& p = problem_;
  const StateTrajectory traj = solve_state_obstacle(u, p.init, p.potential, p.model, p.time, p.grid, p.solver);
  return evaluate_cost(traj, u, p.objective, p.grid, p.time);
}

Evaluation ObstacleSurrogateObjective::evaluate(const Series& u) const {
  const Problem& p = problem_;
  Evaluation e;
  e.state = solve_state_obstacle(u, p.init, p.potential, p.model, p.time, p.grid, p.solver);
  e.cost = evaluate_cost(e.state, u, p.objective, p.grid, p.time);
  const LogarithmicObjective smooth(surrogate_);
  const StateTrajectory log_state = smooth.state(u);
  e.adjoint = solve_adjoint(log_state, p.objective, p.model, p.time, p.grid);
  e.gradient = reduced_gradient(e.adjoint, u, p.objective);
  return e;
}

Series project_admissible(const Series& raw, const ControlField& bounds) {
  if (raw.size() != bounds.lower.size()) throw StructuralError("project_admissible: level count mismatch");
  Series out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k].size() != bounds.lower[k].size()) throw StructuralError("project_admissible: node count mismatch");
    out[k].resize(raw[k].size());
    for (std::size_t n = 0; n < raw[k].size(); ++n) {
      out[k][n] = std::clamp(raw[k][n], bounds.lower[k][n], bounds.upper[k][n]);
    }
  }
  return out;
}

namespace {

Series axpy(const Series& x, double a, const Series& y) {
  Series out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k].resize(x[k].size());
    for (std::size_t n = 0; n < x[k].size(); ++n) out[k][n] = x[k][n] + a * y[k][n];
  }
  return out;
}

double control_norm(const Series& a, const GridSpec& grid, const TimeGrid& tg) {
  return norm_q(a, grid, tg, TimeRule::ControlLeftRectangle);
}

}  // namespace

double vi_residual(const ControlField& u, const Series& gradient, double step, const GridSpec& grid,
                   const TimeGrid& tg) {
  const Series trial = project_admissible(axpy(u.values, -step, gradient), u);
  return control_norm(difference(u.values, trial), grid, tg);
}

double projection_formula_residual(const ControlField& u, const Series& q, double ell, const GridSpec& grid,
                                   const TimeGrid& tg, const Series* u_bar) {
  const double weight = ell + (u_bar ? 1.0 : 0.0);
  if (!(weight > 0.0)) throw DomainError("projection formula needs ell > 0");
  Series target(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    target[k].resize(q[k].size());
    for (std::size_t n = 0; n < q[k].size(); ++n) {
      const double anchor = u_bar ? (*u_bar)[k][n] : 0.0;
      target[k][n] = std::clamp((anchor - q[k][n]) / weight, u.lower[k][n], u.upper[k][n]);
    }
  }
  return control_norm(difference(u.values, target), grid, tg);
}

double bang_bang_fraction(const ControlField& u, double tol) {
  std::size_t on_bound = 0, total = 0;
  for (std::size_t k = 0; k + 1 < u.values.size(); ++k) {
    for (std::size_t n = 0; n < u.values[k].size(); ++n) {
      ++total;
      const double x = u.values[k][n];
      if (std::abs(x - u.lower[k][n]) <= tol || std::abs(x - u.upper[k][n]) <= tol) ++on_bound;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(on_bound) / static_cast<double>(total);
}

OptimizationResult projected_gradient(const ControlField& u0, const ReducedObjective& objective,
                                      const OptimizerOptions& opts, const GridSpec& grid, const TimeGrid& tg) {
  u0.validate(grid, tg);
  OptimizationResult res;
  res.control = u0;
  Evaluation cur = objective.evaluate(res.control.values);
  Series prev_u, prev_g;

  for (int it = 0;; ++it) {
    const double r = vi_residual(res.control, cur.gradient, opts.s0, grid, tg);
    HistoryEntry entry{it, cur.cost, 0.0, r};
    if (r <= opts.tol) {
      res.history.push_back(entry);
      res.converged = true;
      break;
    }
    if (it >= opts.max_iter) {
      res.history.push_back(entry);
      break;
    }

    double s = opts.s0;
    if (opts.bb_steps && !prev_u.empty()) {
      const Series du = difference(res.control.values, prev_u);
      const Series dg = difference(cur.gradient, prev_g);
      const double num = inner_product_q(du, du, grid, tg, TimeRule::ControlLeftRectangle);
      const double den = inner_product_q(du, dg, grid, tg, TimeRule::ControlLeftRectangle);
      if (den > 0.0 && num > 0.0) s = std::clamp(num / den, opts.min_step, opts.max_step);
    }
    bool accepted = false;
    Series trial;
    double trial_cost = 0.0;
    while (s >= opts.min_step) {
      trial = project_admissible(axpy(res.control.values, -s, cur.gradient), res.control);
      const double move = control_norm(difference(trial, res.control.values), grid, tg);
      trial_cost = objective.cost(trial);
      if (trial_cost <= cur.cost - opts.armijo_c / s * move * move) {
        accepted = true;
        break;
      }
      s *= opts.shrink;
    }
    entry.step = accepted ? s : 0.0;
    res.history.push_back(entry);
    if (!accepted) {
      res.stalled = true;
      break;
    }
    prev_u = std::move(res.control.values);
    prev_g = std::move(cur.gradient);
    res.control.values = std::move(trial);
    cur = objective.evaluate(res.control.values);
  }
  res.final = std::move(cur);
  return res;
}

OptimizationResult solve_adapted_problem(double gamma, const Series& u_bar, const Problem& problem,
                                         const ControlField& start, const OptimizerOptions& opts) {
  Problem p = problem.with_potential(PotentialSpec::logarithmic(gamma, problem.potential.f2_coefficient));
  p.potential.custom_f2 = problem.potential.custom_f2;
  const LogarithmicObjective adapted(p, u_bar);
  return projected_gradient(start, adapted, opts, p.grid, p.time);
}

}  // namespace pfoc
