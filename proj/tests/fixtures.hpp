#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "pfoc/config.hpp"
#include "pfoc/problem.hpp"

namespace fixtures {

using namespace pfoc;

inline std::string config_path(const std::string& name) {
  return std::string(PFOC_SOURCE_DIR) + "/configs/" + name;
}

inline Field sample(const GridSpec& g, double (*f)(double)) {
  Field out(g.node_count());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = f(g.coordinate(0, static_cast<int>(n)));
  return out;
}

/// 1D instance with every cost term active; phi stays well inside (-1, 1).
inline Problem coupled(double gamma = 0.1, int nodes = 33, double horizon = 0.5, int steps = 50, double k = 0.5) {
  const GridSpec g = GridSpec::line(1.0, nodes);
  const TimeGrid tg(horizon, steps);
  Problem p{g, tg, ModelParams{1.0, 1.0, 1.0}, {}, PotentialSpec::logarithmic(gamma, k),
            ObjectiveSpec::zero_targets(g, tg), ControlField::constant(g, tg, 0.0, -1.0, 1.0), {}};
  p.init.phi0 = sample(g, [](double x) { return 0.3 * std::cos(std::numbers::pi * x); });
  p.init.w0 = g.zeros();
  p.init.v0 = sample(g, [](double x) { return 0.2 * x; });
  ObjectiveSpec& o = p.objective;
  o.k1 = o.k2 = o.k3 = o.k4 = o.k5 = 1.0;
  o.k6 = 0.5;
  o.ell = 0.3;
  for (auto& f : o.phi_q) f = sample(g, [](double x) { return 0.5 * std::sin(3.0 * x); });
  o.phi_omega = g.constant(-0.2);
  o.w_omega = g.constant(0.1);
  o.wt_omega = g.constant(0.05);
  return p;
}

}  // namespace fixtures
