#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfoc/optimizer.hpp"
#include "pfoc/problem.hpp"

namespace pfoc {

/// Strictly decreasing gammas in (0, 1].
struct QuenchSchedule {
  std::vector<double> gammas{1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3};
  bool warm_start = true;

  void validate() const;
};

/// Distance of the logarithmic state at one gamma from the obstacle state.
struct QuenchRow {
  double gamma = 0.0;
  double phi_error = 0.0;    // ||phi_g - phi_0||_{Linf(L2)}
  double w_linf_h1 = 0.0;    // ||w_g - w_0||_{Linf(H1)}
  double w_h1_l2 = 0.0;      // ||w_g - w_0||_{H1(L2)}
  double min_phi = 0.0;
  double max_phi = 0.0;
};

struct QuenchReport {
  std::vector<QuenchRow> rows;
  double slope = 0.0;      // least-squares slope of log phi_error vs log gamma
  bool monotone = false;   // phi_error nonincreasing as gamma decreases
  double obstacle_max_abs = 0.0;
  double obstacle_subdiff = 0.0;
};

/// Solves the obstacle state once and the logarithmic state for every gamma (independent, parallel up to `threads`).
QuenchReport state_quench_sweep(const Series& u, const Problem& problem, const QuenchSchedule& schedule,
                                int threads = 1);

/// Both sides of the two-gamma stability estimate for controls u1, u2.
struct PairwiseReport {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double phi_diff = 0.0;      // ||phi_1 - phi_2||_{Linf(L2)}
  double w_diff = 0.0;        // ||w_1 - w_2||_{Linf(H1)}
  double gamma_term = 0.0;    // (gamma2 - gamma1)^{1/2}
  double control_term = 0.0;  // ||1*(u1 - u2)||_{L2(L2)}
  double ratio = 0.0;         // phi_diff / (gamma_term + control_term), 0 when both vanish
};

PairwiseReport pairwise_gamma_estimate(const Series& u1, const Series& u2, double gamma1, double gamma2,
                                       const Problem& problem);

/**
 * Equal-control pairs (gamma_{i+1}, gamma_i) along the schedule. The constant
 * C_1 of the first pair calibrates the estimate; `stable` holds when no later
 * pair needs a constant above 3 C_1.
 */
struct ConstantStudy {
  std::vector<PairwiseReport> pairs;
  double calibrated = 0.0;
  double max_ratio = 0.0;
  bool stable = false;
  double slope = 0.0;  // least-squares slope of log phi_diff vs log (gamma2 - gamma1)
};

ConstantStudy pairwise_constant_study(const Series& u, const Problem& problem, const QuenchSchedule& schedule,
                                      int threads = 1);

struct ApproxEntry {
  double gamma = 0.0;
  double distance = 0.0;       // ||u_g - u_bar||_{L2(Q)}
  double adapted_cost = 0.0;   // J~_g(u_g)
  double vi_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  ControlField control;
};

struct ApproxReport {
  ControlField u_bar;
  double u_bar_cost = 0.0;     // obstacle cost J(S_0(u_bar), u_bar)
  bool u_bar_converged = false;
  bool u_bar_stalled = false;
  double u_bar_vi_residual = 0.0;
  std::vector<ApproxEntry> entries;
  bool distances_nonincreasing = false;
  bool cost_gaps_nonincreasing = false;  // |J~_g(u_g) - J(u_bar)| along the schedule
  double final_relative_gap = 0.0;  // |J~ - J(u_bar)| / max(J(u_bar), 1e-12) at the last gamma
};

/**
 * Computes u_bar by projected gradient on the obstacle cost with the adjoint
 * at the smallest scheduled gamma as gradient surrogate (a stall there is
 * recorded, not fatal), then solves the adapted problem for every gamma.
 * A stall of an adapted solve throws SolverError naming the schedule index.
 */
ApproxReport approximate_optimal_control(const Problem& problem, const QuenchSchedule& schedule,
                                         const OptimizerOptions& opts, int threads = 1,
                                         const std::optional<ControlField>& u_bar_guess = std::nullopt);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pfoc
