#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "pfoc/adjoint_solver.hpp"
#include "pfoc/cli.hpp"
#include "pfoc/config.hpp"
#include "pfoc/deep_quench.hpp"
#include "pfoc/verification.hpp"

using namespace pfoc;
using fixtures::config_path;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "):" << o.detail.str()
            << std::endl;
}

Problem at_gamma(const Problem& p, double gamma) {
  return p.with_potential(PotentialSpec::logarithmic(gamma, p.potential.f2_coefficient));
}

StateTrajectory log_state(const Problem& p, const Series& u) {
  return solve_state(u, p.init, p.potential, p.model, p.time, p.grid, p.solver);
}

bool interior(const StateTrajectory& s) { return s.max_phi() < 1.0 && s.min_phi() > -1.0; }

double worst_subdiff(const StateTrajectory& s) {
  double w = 0.0;
  for (std::size_t k = 0; k < s.phi.size(); ++k) w = std::max(w, subdiff_residual(s.phi[k], s.xi[k]));
  return w;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  return files;
}

fs::path cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != kExitOk) throw std::runtime_error("cli exit " + std::to_string(code) + ": " + err.str());
  std::string s = out.str();
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

int main() {
  const RunConfig coupled = load_config(config_path("coupled_1d.json"));
  const RunConfig quench = load_config(config_path("quench_1d.json"));
  const RunConfig tracking = load_config(config_path("tracking_1d.json"));
  const int threads = 4;

  report(1, "gradient correctness", [&](Outcome& o) {
    const Problem& p = coupled.problem;
    const LogarithmicObjective obj(p);
    const auto steps = halving_steps(coupled.verification.h0, coupled.verification.steps);
    double worst = 1e9, worst_neg = 0.0;
    for (int i = 0; i < coupled.verification.pairs; ++i) {
      const std::uint64_t seed = coupled.verification.seed + static_cast<std::uint64_t>(i);
      const Series u = random_field(p.grid, p.time, -0.5, 0.5, seed);
      const Series d = random_direction(p.grid, p.time, seed + 1000);
      const Evaluation e = obj.evaluate(u);
      Series bad = e.gradient;
      for (auto& f : bad) {
        for (double& x : f) x *= 1.0 + coupled.verification.perturbation;
      }
      worst = std::min(worst, taylor_order(obj, u, d, e.gradient, steps, p.grid, p.time, threads).order);
      worst_neg = std::max(worst_neg, taylor_order(obj, u, d, bad, steps, p.grid, p.time, threads).order);
    }
    o.detail << " pairs=" << coupled.verification.pairs << " min order=" << worst << " perturbed max order=" << worst_neg;
    o.require(worst >= 1.9, "order >= 1.9");
    o.require(worst_neg < 1.2, "perturbed order < 1.2");
  });

  report(2, "deep-quench state rate", [&](Outcome& o) {
    const QuenchReport r = state_quench_sweep(quench.problem.control.values, quench.problem, quench.quench, threads);
    o.detail << " slope=" << r.slope << " monotone=" << r.monotone << " errors=";
    for (const auto& row : r.rows) o.detail << row.phi_error << (&row == &r.rows.back() ? "" : ",");
    o.require(r.slope >= 0.45 && r.slope <= 1.1, "slope in [0.45, 1.1]");
    o.require(r.monotone, "monotone error");
  });

  report(3, "pairwise gamma estimate", [&](Outcome& o) {
    const ConstantStudy s =
        pairwise_constant_study(quench.problem.control.values, quench.problem, quench.quench, threads);
    o.detail << " pairs=" << s.pairs.size() << " C1=" << s.calibrated << " max C=" << s.max_ratio
             << " slope=" << s.slope;
    o.require(s.pairs.size() >= 3, "three or more pairs");
    o.require(s.stable, "constant within 3x");
  });

  report(4, "bounds and separation", [&](Outcome& o) {
    int log_runs = 0, obstacle_runs = 0;
    double worst_log = 0.0, worst_obs = 0.0, worst_sub = 0.0;
    auto log_check = [&](const Problem& p, const Series& u) {
      const StateTrajectory s = log_state(p, u);
      ++log_runs;
      worst_log = std::max({worst_log, s.max_phi(), -s.min_phi()});
      o.require(interior(s), "logarithmic run strictly interior");
    };
    auto obstacle_check = [&](const Problem& p, const Series& u) {
      const StateTrajectory s = solve_state_obstacle(u, p.init, p.potential, p.model, p.time, p.grid, p.solver);
      ++obstacle_runs;
      worst_obs = std::max({worst_obs, s.max_phi(), -s.min_phi()});
      worst_sub = std::max(worst_sub, worst_subdiff(s));
      o.require(s.max_phi() <= 1.0 && s.min_phi() >= -1.0, "obstacle run in [-1, 1]");
      o.require(worst_subdiff(s) <= 1e-8, "subdifferential residual <= 1e-8");
    };
    for (const RunConfig* c : {&coupled, &quench, &tracking}) {
      for (double gamma : {1.0, 0.1, 0.01, 0.001}) log_check(at_gamma(c->problem, gamma), c->problem.control.values);
      obstacle_check(c->problem, c->problem.control.values);
    }
    const RunConfig smoke = load_config(config_path("smoke_2d.json"));
    log_check(smoke.problem, smoke.problem.control.values);

    Problem contact = quench.problem;
    contact.init.phi0 = contact.grid.constant(-0.99);
    contact.potential = PotentialSpec::obstacle(5.0);
    obstacle_check(contact, zeros_series(contact.grid, contact.time));
    o.detail << " log runs=" << log_runs << " max|phi|=" << worst_log << " obstacle runs=" << obstacle_runs
             << " max|phi|=" << worst_obs << " subdiff=" << worst_sub;
  });

  report(5, "projection formula", [&](Outcome& o) {
    for (const RunConfig* c : {&coupled, &tracking}) {
      const LogarithmicObjective obj(c->problem);
      const OptimizationResult r = projected_gradient(c->problem.control, obj, c->optimizer, c->problem.grid,
                                                      c->problem.time);
      const double res = projection_formula_residual(r.control, r.final.adjoint.q, c->problem.objective.ell,
                                                     c->problem.grid, c->problem.time);
      o.detail << " residual=" << res << " (iterations " << r.history.back().iteration << ")";
      o.require(r.converged, "optimizer converged");
      o.require(res <= 10.0 * c->optimizer.tol, "residual <= 10 tol");
    }
  });

  report(6, "complementarity quantity", [&](Outcome& o) {
    double worst = 1e300;
    for (const RunConfig* c : {&coupled, &tracking, &quench}) {
      for (double gamma : {1.0, 0.1, 0.01, 0.001}) {
        const Problem p = at_gamma(c->problem, gamma);
        const StateTrajectory s = log_state(p, p.control.values);
        const AdjointTrajectory a = solve_adjoint(s, p.objective, p.model, p.time, p.grid);
        const double lambda = lambda_pairing(s, a, a.p, gamma, p.grid, p.time);
        worst = std::min(worst, lambda);
        o.require(lambda >= -1e-12, "Lambda(p) >= -1e-12");
      }
    }
    o.detail << " min Lambda(p)=" << worst;
  });

  report(7, "adapted-control convergence", [&](Outcome& o) {
    const ApproxReport r =
        approximate_optimal_control(tracking.problem.with_potential(PotentialSpec::obstacle(tracking.problem.potential.f2_coefficient)),
                                    tracking.quench, tracking.optimizer, threads);
    o.detail << " distances=";
    for (const auto& e : r.entries) o.detail << e.distance << (&e == &r.entries.back() ? "" : ",");
    o.detail << " final gap=" << r.final_relative_gap;
    o.require(r.distances_nonincreasing, "distances nonincreasing");
    o.require(r.final_relative_gap <= 0.01, "final gap <= 1%");
  });

  report(8, "scalar ODE equivalence", [&](Outcome& o) {
    const OdeStudy s = scalar_ode_study(0.5, 0.1, 1.0, {50, 100, 200, 400});
    o.detail << " slope=" << s.slope;
    o.require(s.slope >= 0.9 && s.slope <= 1.1, "slope in [0.9, 1.1]");
  });

  report(9, "uniform-bound shadow", [&](Outcome& o) {
    std::vector<std::vector<double>> rows;
    for (double gamma : {1.0, 0.1, 0.01, 0.001}) {
      const Problem p = at_gamma(coupled.problem, gamma);
      const StateTrajectory s = log_state(p, p.control.values);
      const StateNorms sn = state_norms(s, p.grid, p.time);
      const AdjointNorms an = adjoint_norms(solve_adjoint(s, p.objective, p.model, p.time, p.grid), p.grid, p.time);
      rows.push_back({sn.phi_linf_l2, sn.phi_linf_h1, sn.phi_h1_l2, sn.w_linf_h1, sn.v_linf_l2, sn.v_l2_h1,
                      an.p_linf_l2, an.p_l2_h1, an.q_linf_h1, an.q_h1_l2});
    }
    double worst = 0.0;
    for (const auto& row : rows) {
      for (std::size_t j = 0; j < row.size(); ++j) worst = std::max(worst, row[j] / rows.front()[j]);
    }
    o.detail << " max ratio to gamma=1 values=" << worst;
    o.require(worst <= 3.0, "norms within 3x");
  });

  report(10, "reproducibility", [&](Outcome& o) {
    const fs::path base = fs::temp_directory_path() / "pfoc-acceptance";
    fs::remove_all(base);
    std::size_t compared = 0;
    for (const auto& [cmd, cfg] : std::vector<std::pair<std::string, std::string>>{
             {"adjoint", "coupled_1d.json"}, {"optimize", "tracking_1d.json"}, {"quench-sweep", "quench_1d.json"}}) {
      const std::vector<std::string> args{cmd, config_path(cfg), "--out", base.string(), "--threads", "1"};
      const auto a = csv_files(cli_run(args)), b = csv_files(cli_run(args));
      o.require(!a.empty() && a.size() == b.size(), cmd + " produced the same file set");
      for (const auto& [name, content] : a) {
        ++compared;
        const auto it = b.find(name);
        o.require(it != b.end() && it->second == content, cmd + "/" + name + " identical");
      }
    }
    o.detail << " csv files compared=" << compared;
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
