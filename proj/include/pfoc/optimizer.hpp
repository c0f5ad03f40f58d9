#pragma once

#include <optional>
#include <vector>

#include "pfoc/adjoint_solver.hpp"
#include "pfoc/problem.hpp"

namespace pfoc {

/// Cost, gradient and the solves that produced them, at one control.
struct Evaluation {
  double cost = 0.0;
  Series gradient;
  StateTrajectory state;
  AdjointTrajectory adjoint;
};

/// Reduced cost u -> J(S(u), u) together with its gradient.
class ReducedObjective {
 public:
  virtual ~ReducedObjective() = default;
  virtual double cost(const Series& u) const = 0;
  virtual Evaluation evaluate(const Series& u) const = 0;
};

/**
 * Reduced cost for the logarithmic family with gradient q + ell u from the
 * adjoint; with an anchor u_bar this is the adapted cost J + 1/2 |u - u_bar|^2.
 * Holds a reference to the problem, which must outlive it.
 */
class LogarithmicObjective final : public ReducedObjective {
 public:
  explicit LogarithmicObjective(const Problem& problem, std::optional<Series> anchor = std::nullopt);

  double cost(const Series& u) const override;
  Evaluation evaluate(const Series& u) const override;
  StateTrajectory state(const Series& u) const;

 private:
  const Problem& problem_;
  std::optional<Series> anchor_;
};

/**
 * Cost of the double obstacle problem, with the gradient taken from the
 * logarithmic adjoint at `surrogate_gamma` (the limit adjoint is not formed).
 */
class ObstacleSurrogateObjective final : public ReducedObjective {
 public:
  ObstacleSurrogateObjective(const Problem& problem, double surrogate_gamma);

  double cost(const Series& u) const override;
  Evaluation evaluate(const Series& u) const override;

 private:
  const Problem& problem_;
  Problem surrogate_;
};

struct OptimizerOptions {
  double s0 = 1.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double tol = 1e-6;
  int max_iter = 200;
  double min_step = 1e-10;
  bool bb_steps = true;  // start backtracking from the Barzilai-Borwein step instead of s0
  double max_step = 1e4;
};

struct HistoryEntry {
  int iteration = 0;
  double cost = 0.0;
  double step = 0.0;
  double vi_residual = 0.0;
};

struct OptimizationResult {
  ControlField control;
  std::vector<HistoryEntry> history;
  bool converged = false;
  bool stalled = false;
  Evaluation final;
};

/// Nodewise clamp into [lower, upper].
Series project_admissible(const Series& raw, const ControlField& bounds);

/// ||u - P(u - s g)||_{L2(Q)}: zero exactly at points satisfying the discrete variational inequality.
double vi_residual(const ControlField& u, const Series& gradient, double step, const GridSpec& grid,
                   const TimeGrid& tg);

/// ||u - clamp(-(q - anchor_weight * u_bar) / (ell + anchor_weight))||_{L2(Q)}.
double projection_formula_residual(const ControlField& u, const Series& q, double ell, const GridSpec& grid,
                                   const TimeGrid& tg, const Series* u_bar = nullptr);

/// Fraction of control nodes (levels 0..N-1) sitting on a bound.
double bang_bang_fraction(const ControlField& u, double tol = 1e-12);

/**
 * Projected gradient descent with Armijo backtracking. The accepted step
 * satisfies J(u+) <= J(u) - (c/s) |u+ - u|^2; stops when the VI residual
 * with step s0 falls below tol. Backtracking starts from s0, or from the
 * Barzilai-Borwein step <du, du>/<du, dg> (clipped to [min_step, max_step])
 * once two iterates exist. If backtracking falls below min_step the best
 * iterate is returned with `stalled` set.
 */
OptimizationResult projected_gradient(const ControlField& u0, const ReducedObjective& objective,
                                      const OptimizerOptions& opts, const GridSpec& grid, const TimeGrid& tg);

/// Minimizes J + 1/2 |u - u_bar|^2 for the logarithmic potential with parameter gamma.
OptimizationResult solve_adapted_problem(double gamma, const Series& u_bar, const Problem& problem,
                                         const ControlField& start, const OptimizerOptions& opts);

}  // namespace pfoc
