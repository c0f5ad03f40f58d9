#include "pfoc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pfoc/config.hpp"
#include "pfoc/deep_quench.hpp"
#include "pfoc/error.hpp"
#include "pfoc/output.hpp"
#include "pfoc/parallel.hpp"
#include "pfoc/verification.hpp"

#ifndef PFOC_GIT_DESCRIBE
#define PFOC_GIT_DESCRIBE "unknown"
#endif

namespace pfoc {

namespace {

using ojson = nlohmann::ordered_json;

struct Summary {
  ojson diagnostics = ojson::object();
  ojson checks = ojson::object();

  void check(const std::string& name, bool ok) { checks[name] = ok; }
  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ojson& v) { return v.get<bool>(); });
  }
};

struct Context {
  const RunConfig& config;
  const RunDirectory& dir;
  int threads;
  Summary& summary;
};

void record_state(Summary& s, const StateTrajectory& traj, const GridSpec& grid, const TimeGrid& tg) {
  const StateNorms n = state_norms(traj, grid, tg);
  s.diagnostics["min_phi"] = traj.min_phi();
  s.diagnostics["max_phi"] = traj.max_phi();
  s.diagnostics["max_abs_phi"] = std::max(std::abs(traj.min_phi()), std::abs(traj.max_phi()));
  s.diagnostics["newton_iterations"] = traj.newton_iterations;
  s.diagnostics["pdas_iterations"] = traj.pdas_iterations;
  s.diagnostics["state_norms"] = {{"phi_linf_l2", n.phi_linf_l2}, {"phi_linf_h1", n.phi_linf_h1},
                                  {"phi_h1_l2", n.phi_h1_l2},     {"w_linf_h1", n.w_linf_h1},
                                  {"v_linf_l2", n.v_linf_l2},     {"v_l2_h1", n.v_l2_h1},
                                  {"v_linf", n.v_linf}};
}

void check_state(Summary& s, const StateTrajectory& traj) {
  const double m = std::max(std::abs(traj.min_phi()), std::abs(traj.max_phi()));
  if (traj.potential.is_logarithmic()) {
    s.check("phi_strictly_interior", m < 1.0);
  } else {
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.phi.size(); ++k) worst = std::max(worst, subdiff_residual(traj.phi[k], traj.xi[k]));
    s.diagnostics["subdiff_residual"] = worst;
    s.check("phi_in_box", m <= 1.0);
    s.check("subdiff_residual_below_1e-8", worst <= 1e-8);
  }
}

Problem require_logarithmic(const RunConfig& c, const std::string& what) {
  if (!c.problem.potential.is_logarithmic()) {
    throw ConfigError(what + " needs potential.kind = \"logarithmic\"");
  }
  return c.problem;
}

void simulate(const Context& ctx, bool force_obstacle) {
  Problem pb = ctx.config.problem;
  if (force_obstacle) pb.potential = PotentialSpec::obstacle(pb.potential.f2_coefficient);
  const InteriorBounds b = pb.init.validate(pb.grid);
  ctx.summary.diagnostics["initial_lower_bound"] = b.lower;
  ctx.summary.diagnostics["initial_upper_bound"] = b.upper;
  const StateTrajectory traj = solve_state_any(pb.control.values, pb.init, pb.potential, pb.model, pb.time, pb.grid,
                                               pb.solver);
  ctx.dir.write_levels("phi", traj.phi, pb.grid);
  ctx.dir.write_levels("w", traj.w, pb.grid);
  ctx.dir.write_levels("v", traj.v, pb.grid);
  ctx.dir.write_levels("xi", traj.xi, pb.grid);
  record_state(ctx.summary, traj, pb.grid, pb.time);
  ctx.summary.diagnostics["cost"] = evaluate_cost(traj, pb.control.values, pb.objective, pb.grid, pb.time);
  check_state(ctx.summary, traj);
}

void adjoint(const Context& ctx) {
  const Problem pb = require_logarithmic(ctx.config, "adjoint");
  const LogarithmicObjective objective(pb);
  const Evaluation e = objective.evaluate(pb.control.values);
  ctx.dir.write_levels("p", e.adjoint.p, pb.grid);
  ctx.dir.write_levels("q", e.adjoint.q, pb.grid);
  ctx.dir.write("gradient.csv", series_csv(e.gradient, pb.time));
  record_state(ctx.summary, e.state, pb.grid, pb.time);
  const CostTerms t = cost_terms(e.state, pb.control.values, pb.objective, pb.grid, pb.time);
  ctx.summary.diagnostics["cost"] = e.cost;
  ctx.summary.diagnostics["cost_terms"] = {{"phi_tracking", t.phi_tracking}, {"phi_terminal", t.phi_terminal},
                                           {"w_tracking", t.w_tracking},     {"w_terminal", t.w_terminal},
                                           {"wt_tracking", t.wt_tracking},   {"wt_terminal", t.wt_terminal},
                                           {"control", t.control}};
  const double lambda = lambda_pairing(e.state, e.adjoint, e.adjoint.p, pb.potential.gamma, pb.grid, pb.time);
  const AdjointNorms n = adjoint_norms(e.adjoint, pb.grid, pb.time);
  ctx.summary.diagnostics["lambda_p"] = lambda;
  ctx.summary.diagnostics["adjoint_norms"] = {{"p_linf_l2", n.p_linf_l2}, {"p_l2_h1", n.p_l2_h1},
                                              {"q_linf_h1", n.q_linf_h1}, {"q_h1_l2", n.q_h1_l2}};
  ctx.summary.diagnostics["gradient_norm"] =
      norm_q(e.gradient, pb.grid, pb.time, TimeRule::ControlLeftRectangle);
  check_state(ctx.summary, e.state);
  ctx.summary.check("lambda_nonnegative", lambda >= -1e-12);
}

void gradient_check(const Context& ctx) {
  const Problem pb = require_logarithmic(ctx.config, "gradient-check");
  const VerificationOptions& v = ctx.config.verification;
  const LogarithmicObjective objective(pb);
  const std::vector<double> steps = halving_steps(v.h0, v.steps);
  struct PairResult {
    TaylorReport plain, perturbed;
    double fd = 0.0;
  };
  const auto results = parallel_map(static_cast<std::size_t>(v.pairs), ctx.threads, [&](std::size_t i) {
    const Series raw = random_field(pb.grid, pb.time, -0.5, 0.5, v.seed + 2 * i);
    const Series u = project_admissible(raw, pb.control);
    const Series d = random_direction(pb.grid, pb.time, v.seed + 2 * i + 1);
    const Evaluation e = objective.evaluate(u);
    Series g = e.gradient;
    for (auto& f : g) {
      for (double& x : f) x *= 1.0 + v.perturbation;
    }
    PairResult r;
    r.plain = taylor_order(objective, u, d, e.gradient, steps, pb.grid, pb.time);
    r.perturbed = taylor_order(objective, u, d, g, steps, pb.grid, pb.time);
    r.fd = fd_directional_derivative(objective, u, d, v.h0);
    return r;
  });
  std::vector<std::vector<double>> rows;
  ojson orders = ojson::array(), neg = ojson::array(), fd = ojson::array();
  double min_order = INFINITY, max_neg = -INFINITY;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    for (std::size_t j = 0; j < steps.size(); ++j) {
      rows.push_back({static_cast<double>(i), steps[j], r.plain.remainders[j], r.perturbed.remainders[j]});
    }
    orders.push_back(r.plain.order);
    neg.push_back(r.perturbed.order);
    fd.push_back({{"adjoint", r.plain.derivative}, {"central_difference", r.fd}});
    min_order = std::min(min_order, r.plain.order);
    max_neg = std::max(max_neg, r.perturbed.order);
  }
  ctx.dir.write("taylor.csv", table_csv({"pair", "h", "remainder", "remainder_perturbed"}, rows));
  ctx.summary.diagnostics["taylor_orders"] = orders;
  ctx.summary.diagnostics["perturbed_orders"] = neg;
  ctx.summary.diagnostics["directional_derivatives"] = fd;
  ctx.summary.diagnostics["taylor_order"] = min_order;
  ctx.summary.diagnostics["perturbed_order"] = max_neg;
  ctx.summary.check("taylor_order_at_least_1.9", min_order >= 1.9);
  ctx.summary.check("perturbed_order_below_1.2", max_neg < 1.2);
}

void optimize(const Context& ctx) {
  const Problem& pb = ctx.config.problem;
  const OptimizerOptions& opts = ctx.config.optimizer;
  std::optional<LogarithmicObjective> smooth;
  std::optional<ObstacleSurrogateObjective> surrogate;
  const ReducedObjective* objective = nullptr;
  if (pb.potential.is_logarithmic()) {
    objective = &smooth.emplace(pb);
  } else {
    objective = &surrogate.emplace(pb, ctx.config.quench.gammas.back());
    ctx.summary.diagnostics["surrogate_gamma"] = ctx.config.quench.gammas.back();
  }
  const OptimizationResult res = projected_gradient(pb.control, *objective, opts, pb.grid, pb.time);
  std::vector<std::vector<double>> rows;
  bool monotone = true;
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    const auto& h = res.history[i];
    rows.push_back({static_cast<double>(h.iteration), h.cost, h.step, h.vi_residual});
    if (i > 0 && h.cost > res.history[i - 1].cost) monotone = false;
  }
  ctx.dir.write("history.csv", table_csv({"iteration", "cost", "step", "vi_residual"}, rows));
  ctx.dir.write("control.csv", series_csv(res.control.values, pb.time));
  ctx.summary.diagnostics["converged"] = res.converged;
  ctx.summary.diagnostics["stalled"] = res.stalled;
  ctx.summary.diagnostics["iterations"] = res.history.back().iteration;
  ctx.summary.diagnostics["cost"] = res.final.cost;
  ctx.summary.diagnostics["vi_residual"] = res.history.back().vi_residual;
  ctx.summary.check("cost_history_nonincreasing", monotone);
  if (pb.objective.ell > 0.0) {
    const double pr =
        projection_formula_residual(res.control, res.final.adjoint.q, pb.objective.ell, pb.grid, pb.time);
    ctx.summary.diagnostics["projection_residual"] = pr;
    if (pb.potential.is_logarithmic() && res.converged) {
      ctx.summary.check("projection_formula_within_10_tol", pr <= 10.0 * opts.tol);
    }
  } else {
    ctx.summary.diagnostics["bang_bang_fraction"] = bang_bang_fraction(res.control);
  }
}

void quench_sweep(const Context& ctx) {
  const Problem& pb = ctx.config.problem;
  const QuenchReport q = state_quench_sweep(pb.control.values, pb, ctx.config.quench, ctx.threads);
  std::vector<std::vector<double>> rows;
  for (const auto& r : q.rows) rows.push_back({r.gamma, r.phi_error, r.w_linf_h1, r.w_h1_l2, r.min_phi, r.max_phi});
  ctx.dir.write("quench.csv",
                table_csv({"gamma", "phi_error", "w_linf_h1", "w_h1_l2", "min_phi", "max_phi"}, rows));
  ctx.summary.diagnostics["slope"] = q.slope;
  ctx.summary.diagnostics["monotone"] = q.monotone;
  ctx.summary.diagnostics["obstacle_max_abs_phi"] = q.obstacle_max_abs;
  ctx.summary.diagnostics["obstacle_subdiff_residual"] = q.obstacle_subdiff;
  ctx.summary.check("error_monotone", q.monotone);
  ctx.summary.check("slope_in_0.45_1.1", q.slope >= 0.45 && q.slope <= 1.1);

  if (ctx.config.quench.gammas.size() >= 2) {
    const ConstantStudy c = pairwise_constant_study(pb.control.values, pb, ctx.config.quench, ctx.threads);
    rows.clear();
    for (const auto& p : c.pairs) rows.push_back({p.gamma1, p.gamma2, p.phi_diff, p.w_diff, p.gamma_term, p.ratio});
    ctx.dir.write("pairwise.csv",
                  table_csv({"gamma1", "gamma2", "phi_diff", "w_diff", "gamma_term", "ratio"}, rows));
    ctx.summary.diagnostics["calibrated_constant"] = c.calibrated;
    ctx.summary.diagnostics["max_constant"] = c.max_ratio;
    ctx.summary.diagnostics["pairwise_slope"] = c.slope;
    ctx.summary.check("constant_within_3x", c.stable);
  }
}

void approx_control(const Context& ctx) {
  const Problem& pb = ctx.config.problem;
  const ApproxReport a = approximate_optimal_control(pb, ctx.config.quench, ctx.config.optimizer, ctx.threads);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& e = a.entries[i];
    rows.push_back({e.gamma, e.distance, e.adapted_cost, e.vi_residual, static_cast<double>(e.iterations),
                    e.converged ? 1.0 : 0.0});
    char name[48];
    std::snprintf(name, sizeof(name), "control_%02zu.csv", i);
    ctx.dir.write(name, series_csv(e.control.values, pb.time));
  }
  ctx.dir.write("approx.csv",
                table_csv({"gamma", "distance", "adapted_cost", "vi_residual", "iterations", "converged"}, rows));
  ctx.dir.write("u_bar.csv", series_csv(a.u_bar.values, pb.time));
  ctx.summary.diagnostics["u_bar_cost"] = a.u_bar_cost;
  ctx.summary.diagnostics["u_bar_converged"] = a.u_bar_converged;
  ctx.summary.diagnostics["u_bar_stalled"] = a.u_bar_stalled;
  ctx.summary.diagnostics["u_bar_vi_residual"] = a.u_bar_vi_residual;
  ctx.summary.diagnostics["final_relative_gap"] = a.final_relative_gap;
  ctx.summary.diagnostics["cost_gaps_nonincreasing"] = a.cost_gaps_nonincreasing;
  ctx.summary.check("distances_nonincreasing", a.distances_nonincreasing);
  ctx.summary.check("final_gap_within_1_percent", a.final_relative_gap <= 0.01);
}

std::string now_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-field optimal control toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "runs";
  int threads = 1;

  using Runner = std::function<void(const Context&)>;
  struct Command {
    std::string name;
    std::string help;
    Runner run;
  };
  const std::vector<Command> commands{
      {"simulate", "forward solve with the configured potential", [](const Context& c) { simulate(c, false); }},
      {"simulate-obstacle", "forward solve with the double obstacle potential",
       [](const Context& c) { simulate(c, true); }},
      {"adjoint", "state, adjoint and reduced gradient at the initial control", adjoint},
      {"gradient-check", "Taylor test of the adjoint gradient", gradient_check},
      {"optimize", "projected gradient descent on the reduced cost", optimize},
      {"quench-sweep", "state convergence to the obstacle limit over the gamma schedule", quench_sweep},
      {"approx-control", "adapted optimal controls along the gamma schedule", approx_control},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "parent directory of the run directory");
    sub->add_option("--threads", threads, "maximum worker threads")->check(CLI::PositiveNumber);
    subs[name] = sub;
  }

  std::vector<std::string> argv_store{"pfoc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string name;
  Runner runner;
  for (const auto& c : commands) {
    if (subs[c.name]->parsed()) {
      name = c.name;
      runner = c.run;
    }
  }

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const RunDirectory dir(out_dir, name);
  ojson manifest;
  manifest["tool"] = "pfoc";
  manifest["version"] = PFOC_GIT_DESCRIBE;
  manifest["subcommand"] = name;
  manifest["created"] = now_utc();
  manifest["threads"] = threads;
  manifest["config"] = ojson::parse(write_config(config));
  dir.write("manifest.json", manifest.dump(2) + "\n");

  Summary summary;
  const Context ctx{config, dir, threads, summary};
  try {
    runner(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    ojson diag{{"error", e.what()}, {"last_residual", e.last_residual()}};
    dir.write("diagnostic.json", diag.dump(2) + "\n");
    err << "solver failure: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kExitSolver;
  } catch (const std::domain_error& e) {
    ojson diag{{"error", e.what()}};
    dir.write("diagnostic.json", diag.dump(2) + "\n");
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }

  const bool ok = summary.all_passed();
  ojson s;
  s["subcommand"] = name;
  s["status"] = ok ? "ok" : "invariant_failure";
  s["diagnostics"] = summary.diagnostics;
  s["checks"] = summary.checks;
  dir.write("summary.json", s.dump(2) + "\n");
  out << dir.path().string() << "\n";
  if (!ok) {
    for (const auto& [k, v] : summary.checks.items()) {
      if (!v.get<bool>()) err << "invariant failed: " << k << "\n";
    }
    return kExitInvariant;
  }
  return kExitOk;
}

}  // namespace pfoc
