#include "pfoc/deep_quench.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfoc/error.hpp"
#include "pfoc/parallel.hpp"

namespace pfoc {

namespace {

PotentialSpec log_member(const PotentialSpec& base, double gamma) {
  PotentialSpec p = PotentialSpec::logarithmic(gamma, base.f2_coefficient);
  p.custom_f2 = base.custom_f2;
  return p;
}

PotentialSpec obstacle_member(const PotentialSpec& base) {
  PotentialSpec p = PotentialSpec::obstacle(base.f2_coefficient);
  p.custom_f2 = base.custom_f2;
  return p;
}

StateTrajectory solve_log(const Series& u, const Problem& problem, double gamma) {
  return solve_state(u, problem.init, log_member(problem.potential, gamma), problem.model, problem.time,
                     problem.grid, problem.solver);
}

}  // namespace

void QuenchSchedule::validate() const {
  if (gammas.empty()) throw DomainError("quench schedule is empty");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0 && gammas[i] <= 1.0)) throw DomainError("quench gammas must lie in (0, 1]");
    if (i > 0 && !(gammas[i] < gammas[i - 1])) throw DomainError("quench gammas must be strictly decreasing");
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw StructuralError("loglog_slope needs two or more matched points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope needs positive data");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("loglog_slope: abscissae coincide");
  return sxy / sxx;
}

QuenchReport state_quench_sweep(const Series& u, const Problem& problem, const QuenchSchedule& schedule,
                                int threads) {
  schedule.validate();
  const GridSpec& grid = problem.grid;
  const TimeGrid& tg = problem.time;
  const StateTrajectory limit = solve_state_obstacle(u, problem.init, obstacle_member(problem.potential),
                                                     problem.model, tg, grid, problem.solver);
  QuenchReport report;
  report.obstacle_max_abs = std::max(std::abs(limit.min_phi()), std::abs(limit.max_phi()));
  for (std::size_t k = 0; k < limit.phi.size(); ++k) {
    report.obstacle_subdiff = std::max(report.obstacle_subdiff, subdiff_residual(limit.phi[k], limit.xi[k]));
  }

  report.rows = parallel_map(schedule.gammas.size(), threads, [&](std::size_t i) {
    const StateTrajectory s = solve_log(u, problem, schedule.gammas[i]);
    const Series dw = difference(s.w, limit.w);
    QuenchRow row;
    row.gamma = schedule.gammas[i];
    row.phi_error = norm_linf_l2(difference(s.phi, limit.phi), grid);
    row.w_linf_h1 = norm_linf_h1(dw, grid);
    row.w_h1_l2 = norm_h1_l2(dw, grid, tg);
    row.min_phi = s.min_phi();
    row.max_phi = s.max_phi();
    return row;
  });

  report.monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].phi_error > report.rows[i - 1].phi_error) report.monotone = false;
  }
  if (report.rows.size() >= 2) {
    std::vector<double> g, e;
    for (const auto& r : report.rows) {
      g.push_back(r.gamma);
      e.push_back(r.phi_error);
    }
    if (std::all_of(e.begin(), e.end(), [](double v) { return v > 0.0; })) report.slope = loglog_slope(g, e);
  }
  return report;
}

namespace {

PairwiseReport compare_pair(const StateTrajectory& a, const StateTrajectory& b, const Series& u1, const Series& u2,
                            double gamma1, double gamma2, const Problem& problem) {
  const GridSpec& grid = problem.grid;
  const TimeGrid& tg = problem.time;
  PairwiseReport r;
  r.gamma1 = gamma1;
  r.gamma2 = gamma2;
  r.phi_diff = norm_linf_l2(difference(a.phi, b.phi), grid);
  r.w_diff = norm_linf_h1(difference(a.w, b.w), grid);
  r.gamma_term = std::sqrt(std::abs(gamma2 - gamma1));
  r.control_term = norm_q(convolve_forward(difference(u1, u2), tg), grid, tg, TimeRule::StateRightRectangle);
  const double rhs = r.gamma_term + r.control_term;
  r.ratio = rhs > 0.0 ? r.phi_diff / rhs : 0.0;
  return r;
}

}  // namespace

PairwiseReport pairwise_gamma_estimate(const Series& u1, const Series& u2, double gamma1, double gamma2,
                                       const Problem& problem) {
  if (gamma1 > gamma2) throw DomainError("pairwise_gamma_estimate needs gamma1 <= gamma2");
  const StateTrajectory a = solve_log(u1, problem, gamma1);
  const StateTrajectory b = gamma1 == gamma2 && u1 == u2 ? a : solve_log(u2, problem, gamma2);
  return compare_pair(a, b, u1, u2, gamma1, gamma2, problem);
}

ConstantStudy pairwise_constant_study(const Series& u, const Problem& problem, const QuenchSchedule& schedule,
                                      int threads) {
  schedule.validate();
  if (schedule.gammas.size() < 2) throw DomainError("constant study needs at least two gammas");
  const auto states = parallel_map(schedule.gammas.size(), threads,
                                   [&](std::size_t i) { return solve_log(u, problem, schedule.gammas[i]); });
  ConstantStudy study;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    study.pairs.push_back(
        compare_pair(states[i + 1], states[i], u, u, schedule.gammas[i + 1], schedule.gammas[i], problem));
  }
  study.calibrated = study.pairs.front().ratio;
  for (const auto& p : study.pairs) study.max_ratio = std::max(study.max_ratio, p.ratio);
  study.stable = study.max_ratio <= 3.0 * study.calibrated;
  if (study.pairs.size() >= 2) {
    std::vector<double> d, e;
    for (const auto& p : study.pairs) {
      d.push_back(p.gamma2 - p.gamma1);
      e.push_back(p.phi_diff);
    }
    if (std::all_of(e.begin(), e.end(), [](double v) { return v > 0.0; })) study.slope = loglog_slope(d, e);
  }
  return study;
}

ApproxReport approximate_optimal_control(const Problem& problem, const QuenchSchedule& schedule,
                                         const OptimizerOptions& opts, int threads,
                                         const std::optional<ControlField>& u_bar_guess) {
  schedule.validate();
  const GridSpec& grid = problem.grid;
  const TimeGrid& tg = problem.time;
  const Problem limit = problem.with_potential(obstacle_member(problem.potential));

  ApproxReport report;
  const ObstacleSurrogateObjective surrogate(limit, schedule.gammas.back());
  const OptimizationResult bar = projected_gradient(u_bar_guess ? *u_bar_guess : problem.control, surrogate,
                                                    opts, grid, tg);
  report.u_bar = bar.control;
  report.u_bar_cost = bar.final.cost;
  report.u_bar_converged = bar.converged;
  report.u_bar_stalled = bar.stalled;
  report.u_bar_vi_residual = bar.history.back().vi_residual;

  auto solve_one = [&](std::size_t i, const ControlField& start) {
    const double gamma = schedule.gammas[i];
    const OptimizationResult res = solve_adapted_problem(gamma, report.u_bar.values, problem, start, opts);
    if (res.stalled) {
      throw SolverError("adapted problem stalled at schedule index " + std::to_string(i) +
                            " (gamma = " + std::to_string(gamma) + ")",
                        res.history.back().vi_residual);
    }
    ApproxEntry e;
    e.gamma = gamma;
    e.control = res.control;
    e.distance = norm_q(difference(res.control.values, report.u_bar.values), grid, tg,
                        TimeRule::ControlLeftRectangle);
    e.adapted_cost = res.final.cost;
    e.vi_residual = res.history.back().vi_residual;
    e.iterations = res.history.back().iteration;
    e.converged = res.converged;
    return e;
  };

  if (schedule.warm_start) {
    ControlField start = report.u_bar;
    for (std::size_t i = 0; i < schedule.gammas.size(); ++i) {
      report.entries.push_back(solve_one(i, start));
      start = report.entries.back().control;
    }
  } else {
    report.entries =
        parallel_map(schedule.gammas.size(), threads, [&](std::size_t i) { return solve_one(i, problem.control); });
  }

  report.distances_nonincreasing = true;
  report.cost_gaps_nonincreasing = true;
  auto gap = [&](std::size_t i) { return std::abs(report.entries[i].adapted_cost - report.u_bar_cost); };
  for (std::size_t i = 1; i < report.entries.size(); ++i) {
    if (report.entries[i].distance > report.entries[i - 1].distance) report.distances_nonincreasing = false;
    if (gap(i) > gap(i - 1)) report.cost_gaps_nonincreasing = false;
  }
  const double ref = std::max(report.u_bar_cost, 1e-12);
  report.final_relative_gap = std::abs(report.entries.back().adapted_cost - report.u_bar_cost) / ref;
  return report;
}

}  // namespace pfoc
