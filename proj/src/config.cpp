#include "pfoc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pfoc/error.hpp"
#include "pfoc/expression.hpp"

namespace pfoc {

namespace {

using json = nlohmann::json;
using Path = std::vector<std::string>;

std::string dotted(const Path& path) {
  std::string s;
  for (const auto& p : path) s += (s.empty() ? "" : ".") + p;
  return s.empty() ? "<root>" : s;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source, Path prefix)
      : text_(text), source_(std::move(source)), prefix_(std::move(prefix)) {}

  // Line of the deepest key of `path` that can be found, searching keys in order.
  int line_of(const Path& path) const {
    std::size_t pos = 0;
    bool found_any = false;
    Path full = prefix_;
    full.insert(full.end(), path.begin(), path.end());
    for (const auto& key : full) {
      const std::string quoted = "\"" + key + "\"";
      std::size_t at = pos;
      bool hit = false;
      while ((at = text_.find(quoted, at)) != std::string::npos) {
        std::size_t after = at + quoted.size();
        while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
        if (after < text_.size() && text_[after] == ':') {
          hit = true;
          break;
        }
        at += quoted.size();
      }
      if (!hit) break;
      pos = at;
      found_any = true;
    }
    if (!found_any) return 1;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  [[noreturn]] void fail(const Path& path, const std::string& what) const {
    const int line = line_of(path);
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + dotted(path) + ": " + what, line);
  }

  const json& object(const json& parent, const Path& path, const std::string& key,
                     const std::set<std::string>& allowed, bool required = true) const {
    static const json empty = json::object();
    if (!parent.contains(key)) {
      if (required) fail(path, "missing required section '" + key + "'");
      return empty;
    }
    const json& o = parent.at(key);
    Path p = path;
    p.push_back(key);
    if (!o.is_object()) fail(p, "expected an object");
    for (const auto& [k, v] : o.items()) {
      if (!allowed.count(k)) {
        Path q = p;
        q.push_back(k);
        fail(q, "unknown field '" + k + "'");
      }
    }
    return o;
  }

  double number(const json& obj, const Path& path, const std::string& key,
                std::optional<double> fallback = std::nullopt) const {
    Path p = path;
    p.push_back(key);
    if (!obj.contains(key)) {
      if (!fallback) fail(path, "missing required field '" + key + "'");
      return *fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) fail(p, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(p, "must be finite");
    return d;
  }

  long long integer(const json& obj, const Path& path, const std::string& key,
                    std::optional<long long> fallback = std::nullopt) const {
    Path p = path;
    p.push_back(key);
    if (!obj.contains(key)) {
      if (!fallback) fail(path, "missing required field '" + key + "'");
      return *fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(p, "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const json& obj, const Path& path, const std::string& key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      Path p = path;
      p.push_back(key);
      fail(p, "expected true or false");
    }
    return v.get<bool>();
  }

  Expression expression(const json& v, const Path& p, bool allow_time) const {
    try {
      Expression e(v.get<std::string>());
      if (e.uses_time() && !allow_time) fail(p, "spatial field may not depend on t");
      return e;
    } catch (const ConfigError& err) {
      if (err.line() != 0) throw;
      fail(p, err.what());
    }
  }

  Field spatial(const json& obj, const Path& path, const std::string& key, const GridSpec& grid,
                std::optional<double> fallback = 0.0) const {
    Path p = path;
    p.push_back(key);
    if (!obj.contains(key)) {
      if (!fallback) fail(path, "missing required field '" + key + "'");
      return grid.constant(*fallback);
    }
    return spatial_value(obj.at(key), p, grid, false, 0.0);
  }

  Series spacetime(const json& obj, const Path& path, const std::string& key, const GridSpec& grid,
                   const TimeGrid& tg, double fallback) const {
    Path p = path;
    p.push_back(key);
    if (!obj.contains(key)) return Series(tg.levels(), grid.constant(fallback));
    const json& v = obj.at(key);
    Series s(tg.levels());
    if (v.is_array()) {
      if (v.size() != tg.levels()) {
        fail(p, "expected " + std::to_string(tg.levels()) + " time levels, got " + std::to_string(v.size()));
      }
      for (std::size_t k = 0; k < tg.levels(); ++k) s[k] = spatial_value(v[k], p, grid, false, 0.0);
      return s;
    }
    for (std::size_t k = 0; k < tg.levels(); ++k) s[k] = spatial_value(v, p, grid, true, tg.time(static_cast<int>(k)));
    return s;
  }

 private:
  const std::string& text_;
  std::string source_;
  Path prefix_;

  Field spatial_value(const json& v, const Path& p, const GridSpec& grid, bool allow_time, double t) const {
    const std::size_t nn = grid.node_count();
    Field f(nn);
    if (v.is_number()) {
      const double d = v.get<double>();
      if (!std::isfinite(d)) fail(p, "must be finite");
      return Field(nn, d);
    }
    if (v.is_string()) {
      const Expression e = expression(v, p, allow_time);
      const int nx = grid.nodes(0);
      for (std::size_t n = 0; n < nn; ++n) {
        const int i = static_cast<int>(n) % nx;
        const int j = static_cast<int>(n) / nx;
        const double y = grid.dimension() == 2 ? grid.coordinate(1, j) : 0.0;
        f[n] = e(grid.coordinate(0, i), y, t);
        if (!std::isfinite(f[n])) fail(p, "expression evaluates to a non-finite value");
      }
      return f;
    }
    if (v.is_array()) {
      if (v.size() != nn) fail(p, "expected " + std::to_string(nn) + " nodal values, got " + std::to_string(v.size()));
      for (std::size_t n = 0; n < nn; ++n) {
        if (!v[n].is_number()) fail(p, "nodal values must be numbers");
        f[n] = v[n].get<double>();
        if (!std::isfinite(f[n])) fail(p, "must be finite");
      }
      return f;
    }
    fail(p, "expected a number, an expression string or an array");
  }
};

template <class Fn>
void checked(const Reader& r, const Path& path, Fn fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    r.fail(path, e.what());
  } catch (const StructuralError& e) {
    r.fail(path, e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON: " + e.what(), line);
  }
  Path prefix;
  if (root.is_object() && root.contains("config") && root.contains("tool")) {
    root = root.at("config");
    prefix = {"config"};
  }
  const Reader r(text, source, prefix);
  if (!root.is_object()) r.fail({}, "top level must be an object");
  for (const auto& [k, v] : root.items()) {
    static const std::set<std::string> top{"grid", "time", "model", "potential", "initial", "objective",
                                           "control", "solver", "optimizer", "quench", "verification"};
    if (!top.count(k)) r.fail({k}, "unknown section '" + k + "'");
  }

  RunConfig c;
  Problem& pb = c.problem;

  const json& g = r.object(root, {}, "grid", {"dimension", "extent", "nodes"});
  {
    const Path p{"grid"};
    const long long dim = r.integer(g, p, "dimension", 1);
    if (dim != 1 && dim != 2) r.fail({"grid", "dimension"}, "must be 1 or 2");
    if (!g.contains("extent") || !g.at("extent").is_array() || g.at("extent").size() != static_cast<std::size_t>(dim)) {
      r.fail(g.contains("extent") ? Path{"grid", "extent"} : p, "'extent' must list one length per axis");
    }
    if (!g.contains("nodes") || !g.at("nodes").is_array() || g.at("nodes").size() != static_cast<std::size_t>(dim)) {
      r.fail(g.contains("nodes") ? Path{"grid", "nodes"} : p, "'nodes' must list one count per axis");
    }
    std::array<double, 2> ext{1.0, 1.0};
    std::array<int, 2> nodes{3, 1};
    for (int a = 0; a < dim; ++a) {
      if (!g["extent"][a].is_number()) r.fail({"grid", "extent"}, "lengths must be numbers");
      if (!g["nodes"][a].is_number_integer()) r.fail({"grid", "nodes"}, "counts must be integers");
      ext[a] = g["extent"][a].get<double>();
      nodes[a] = g["nodes"][a].get<int>();
    }
    checked(r, p, [&] { pb.grid = GridSpec(static_cast<int>(dim), ext, nodes); });
  }

  const json& t = r.object(root, {}, "time", {"horizon", "steps"});
  {
    const Path p{"time"};
    const double horizon = r.number(t, p, "horizon");
    const long long steps = r.integer(t, p, "steps");
    if (!(horizon > 0.0)) r.fail({"time", "horizon"}, "must be positive");
    if (steps < 1) r.fail({"time", "steps"}, "must be at least 1");
    pb.time = TimeGrid(horizon, static_cast<int>(steps));
  }
  const GridSpec& grid = pb.grid;
  const TimeGrid& tg = pb.time;

  const json& m = r.object(root, {}, "model", {"alpha", "beta", "theta_c"});
  {
    const Path p{"model"};
    pb.model.alpha = r.number(m, p, "alpha");
    pb.model.beta = r.number(m, p, "beta");
    pb.model.theta_c = r.number(m, p, "theta_c");
    checked(r, p, [&] { pb.model.validate(); });
  }

  const json& pot = r.object(root, {}, "potential", {"kind", "gamma", "f2_coefficient"});
  {
    const Path p{"potential"};
    const std::string kind = pot.value("kind", std::string("logarithmic"));
    const double k = r.number(pot, p, "f2_coefficient", 0.0);
    if (k < 0.0) r.fail({"potential", "f2_coefficient"}, "must be nonnegative");
    if (kind == "logarithmic") {
      pb.potential = PotentialSpec::logarithmic(r.number(pot, p, "gamma"), k);
    } else if (kind == "obstacle") {
      pb.potential = PotentialSpec::obstacle(k);
    } else {
      r.fail({"potential", "kind"}, "must be \"logarithmic\" or \"obstacle\"");
    }
    checked(r, p, [&] { pb.potential.validate(); });
  }

  const json& ini = r.object(root, {}, "initial", {"phi0", "w0", "v0"});
  {
    const Path p{"initial"};
    pb.init.phi0 = r.spatial(ini, p, "phi0", grid, std::nullopt);
    pb.init.w0 = r.spatial(ini, p, "w0", grid);
    pb.init.v0 = r.spatial(ini, p, "v0", grid);
    checked(r, p, [&] { pb.init.validate(grid); });
  }

  const json& ob = r.object(root, {}, "objective",
                            {"k1", "k2", "k3", "k4", "k5", "k6", "ell", "phi_q", "w_q", "wt_q", "phi_omega",
                             "w_omega", "wt_omega"});
  {
    const Path p{"objective"};
    ObjectiveSpec& o = pb.objective;
    o.k1 = r.number(ob, p, "k1", 0.0);
    o.k2 = r.number(ob, p, "k2", 0.0);
    o.k3 = r.number(ob, p, "k3", 0.0);
    o.k4 = r.number(ob, p, "k4", 0.0);
    o.k5 = r.number(ob, p, "k5", 0.0);
    o.k6 = r.number(ob, p, "k6", 0.0);
    o.ell = r.number(ob, p, "ell", 0.0);
    o.phi_q = r.spacetime(ob, p, "phi_q", grid, tg, 0.0);
    o.w_q = r.spacetime(ob, p, "w_q", grid, tg, 0.0);
    o.wt_q = r.spacetime(ob, p, "wt_q", grid, tg, 0.0);
    o.phi_omega = r.spatial(ob, p, "phi_omega", grid);
    o.w_omega = r.spatial(ob, p, "w_omega", grid);
    if (ob.contains("wt_omega")) o.wt_omega = r.spatial(ob, p, "wt_omega", grid);
    checked(r, p, [&] { o.validate(grid, tg); });
  }

  const json& ctl = r.object(root, {}, "control", {"initial", "lower", "upper"}, false);
  {
    const Path p{"control"};
    pb.control.values = r.spacetime(ctl, p, "initial", grid, tg, 0.0);
    pb.control.lower = r.spacetime(ctl, p, "lower", grid, tg, -1.0);
    pb.control.upper = r.spacetime(ctl, p, "upper", grid, tg, 1.0);
    checked(r, p, [&] { pb.control.validate(grid, tg); });
  }

  const json& sv = r.object(root, {}, "solver",
                            {"newton_tol", "newton_max_iter", "max_halvings", "pdas_c", "pdas_max_iter",
                             "pdas_newton_tol"},
                            false);
  {
    const Path p{"solver"};
    SolverOptions d;
    pb.solver.newton.tol = r.number(sv, p, "newton_tol", d.newton.tol);
    pb.solver.newton.max_iter = static_cast<int>(r.integer(sv, p, "newton_max_iter", d.newton.max_iter));
    pb.solver.newton.max_halvings = static_cast<int>(r.integer(sv, p, "max_halvings", d.newton.max_halvings));
    pb.solver.pdas.c = r.number(sv, p, "pdas_c", d.pdas.c);
    pb.solver.pdas.max_iter = static_cast<int>(r.integer(sv, p, "pdas_max_iter", d.pdas.max_iter));
    pb.solver.pdas.newton_tol = r.number(sv, p, "pdas_newton_tol", d.pdas.newton_tol);
    if (!(pb.solver.newton.tol > 0.0) || pb.solver.newton.max_iter < 1 || pb.solver.newton.max_halvings < 0 ||
        !(pb.solver.pdas.c > 0.0) || pb.solver.pdas.max_iter < 1 || !(pb.solver.pdas.newton_tol > 0.0)) {
      r.fail(p, "tolerances, c and iteration limits must be positive");
    }
  }

  const json& op = r.object(root, {}, "optimizer",
                            {"s0", "armijo_c", "shrink", "tol", "max_iter", "min_step", "bb_steps", "max_step"},
                            false);
  {
    const Path p{"optimizer"};
    OptimizerOptions d;
    OptimizerOptions& o = c.optimizer;
    o.s0 = r.number(op, p, "s0", d.s0);
    o.armijo_c = r.number(op, p, "armijo_c", d.armijo_c);
    o.shrink = r.number(op, p, "shrink", d.shrink);
    o.tol = r.number(op, p, "tol", d.tol);
    o.max_iter = static_cast<int>(r.integer(op, p, "max_iter", d.max_iter));
    o.min_step = r.number(op, p, "min_step", d.min_step);
    o.bb_steps = r.boolean(op, p, "bb_steps", d.bb_steps);
    o.max_step = r.number(op, p, "max_step", d.max_step);
    if (!(o.s0 > 0.0) || !(o.armijo_c > 0.0 && o.armijo_c < 1.0) || !(o.shrink > 0.0 && o.shrink < 1.0) ||
        !(o.tol > 0.0) || o.max_iter < 0 || !(o.min_step > 0.0) || !(o.max_step >= o.min_step)) {
      r.fail(p, "need s0 > 0, 0 < armijo_c < 1, 0 < shrink < 1, tol > 0, max_iter >= 0, 0 < min_step <= max_step");
    }
  }

  const json& qu = r.object(root, {}, "quench", {"gammas", "warm_start"}, false);
  {
    const Path p{"quench"};
    if (qu.contains("gammas")) {
      const json& gs = qu.at("gammas");
      if (!gs.is_array()) r.fail({"quench", "gammas"}, "expected an array of numbers");
      c.quench.gammas.clear();
      for (const auto& v : gs) {
        if (!v.is_number()) r.fail({"quench", "gammas"}, "expected an array of numbers");
        c.quench.gammas.push_back(v.get<double>());
      }
    }
    c.quench.warm_start = r.boolean(qu, p, "warm_start", true);
    checked(r, p, [&] { c.quench.validate(); });
  }

  const json& ve = r.object(root, {}, "verification", {"pairs", "seed", "h0", "steps", "perturbation"}, false);
  {
    const Path p{"verification"};
    VerificationOptions d;
    VerificationOptions& v = c.verification;
    v.pairs = static_cast<int>(r.integer(ve, p, "pairs", d.pairs));
    const long long seed = r.integer(ve, p, "seed", static_cast<long long>(d.seed));
    if (seed < 0) r.fail({"verification", "seed"}, "must be nonnegative");
    v.seed = static_cast<std::uint64_t>(seed);
    v.h0 = r.number(ve, p, "h0", d.h0);
    v.steps = static_cast<int>(r.integer(ve, p, "steps", d.steps));
    v.perturbation = r.number(ve, p, "perturbation", d.perturbation);
    if (v.pairs < 1 || !(v.h0 > 0.0) || v.steps < 2) r.fail(p, "need pairs >= 1, h0 > 0, steps >= 2");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string write_config(const RunConfig& c) {
  using ojson = nlohmann::ordered_json;
  const Problem& pb = c.problem;
  if (pb.potential.custom_f2) throw ConfigError("a custom F2 cannot be written to a configuration");
  auto series = [](const Series& s) {
    ojson a = ojson::array();
    for (const auto& f : s) a.push_back(f);
    return a;
  };
  ojson j;
  const int dim = pb.grid.dimension();
  ojson ext = ojson::array(), nodes = ojson::array();
  for (int a = 0; a < dim; ++a) {
    ext.push_back(pb.grid.extent(a));
    nodes.push_back(pb.grid.nodes(a));
  }
  j["grid"] = {{"dimension", dim}, {"extent", ext}, {"nodes", nodes}};
  j["time"] = {{"horizon", pb.time.horizon()}, {"steps", pb.time.steps()}};
  j["model"] = {{"alpha", pb.model.alpha}, {"beta", pb.model.beta}, {"theta_c", pb.model.theta_c}};
  if (pb.potential.is_logarithmic()) {
    j["potential"] = {{"kind", "logarithmic"}, {"gamma", pb.potential.gamma},
                      {"f2_coefficient", pb.potential.f2_coefficient}};
  } else {
    j["potential"] = {{"kind", "obstacle"}, {"f2_coefficient", pb.potential.f2_coefficient}};
  }
  j["initial"] = {{"phi0", pb.init.phi0}, {"w0", pb.init.w0}, {"v0", pb.init.v0}};
  const ObjectiveSpec& o = pb.objective;
  ojson ob = {{"k1", o.k1}, {"k2", o.k2}, {"k3", o.k3}, {"k4", o.k4}, {"k5", o.k5}, {"k6", o.k6},
              {"ell", o.ell}, {"phi_q", series(o.phi_q)}, {"w_q", series(o.w_q)}, {"wt_q", series(o.wt_q)},
              {"phi_omega", o.phi_omega}, {"w_omega", o.w_omega}};
  if (o.wt_omega) ob["wt_omega"] = *o.wt_omega;
  j["objective"] = ob;
  j["control"] = {{"initial", series(pb.control.values)}, {"lower", series(pb.control.lower)},
                  {"upper", series(pb.control.upper)}};
  const SolverOptions& s = pb.solver;
  j["solver"] = {{"newton_tol", s.newton.tol}, {"newton_max_iter", s.newton.max_iter},
                 {"max_halvings", s.newton.max_halvings}, {"pdas_c", s.pdas.c},
                 {"pdas_max_iter", s.pdas.max_iter}, {"pdas_newton_tol", s.pdas.newton_tol}};
  const OptimizerOptions& op = c.optimizer;
  j["optimizer"] = {{"s0", op.s0}, {"armijo_c", op.armijo_c}, {"shrink", op.shrink}, {"tol", op.tol},
                    {"max_iter", op.max_iter}, {"min_step", op.min_step}, {"bb_steps", op.bb_steps},
                    {"max_step", op.max_step}};
  j["quench"] = {{"gammas", c.quench.gammas}, {"warm_start", c.quench.warm_start}};
  const VerificationOptions& v = c.verification;
  j["verification"] = {{"pairs", v.pairs}, {"seed", v.seed}, {"h0", v.h0}, {"steps", v.steps},
                       {"perturbation", v.perturbation}};
  return j.dump(2);
}

}  // namespace pfoc
