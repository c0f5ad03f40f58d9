#include "pfoc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfoc/error.hpp"

namespace pfoc {

PotentialSpec PotentialSpec::logarithmic(double gamma, double k) {
  PotentialSpec s;
  s.kind = Kind::Logarithmic;
  s.gamma = gamma;
  s.f2_coefficient = k;
  s.validate();
  return s;
}

PotentialSpec PotentialSpec::obstacle(double k) {
  PotentialSpec s;
  s.kind = Kind::Obstacle;
  s.gamma = 0.0;
  s.f2_coefficient = k;
  s.validate();
  return s;
}

void PotentialSpec::validate() const {
  if (kind == Kind::Logarithmic && !(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("gamma must lie in (0, 1], got " + std::to_string(gamma));
  }
  if (!(f2_coefficient >= 0.0) || !std::isfinite(f2_coefficient)) {
    throw DomainError("f2 coefficient must be finite and nonnegative");
  }
  if (custom_f2) {
    if (!custom_f2->eval) throw DomainError("custom F2 has no evaluator");
    if (!std::isfinite(custom_f2->lipschitz_bound) || custom_f2->lipschitz_bound < 0.0) {
      throw DomainError("custom F2 must report a finite Lipschitz bound for F2'");
    }
  }
}

namespace {
double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }
}  // namespace

double f1log_value(double r) {
  if (!(std::abs(r) <= 1.0)) throw DomainError("F1,log is +infinity outside [-1, 1]");
  return xlogx(1.0 + r) + xlogx(1.0 - r);
}

Derivs f1gamma_derivs(double r, double gamma) {
  if (!(std::abs(r) < 1.0)) {
    throw DomainError("F1,gamma derivatives need |r| < 1, got " + std::to_string(r));
  }
  const double lp = std::log1p(r);
  const double lm = std::log1p(-r);
  return {gamma * ((1.0 + r) * lp + (1.0 - r) * lm), gamma * (lp - lm), 2.0 * gamma / ((1.0 - r) * (1.0 + r))};
}

double obstacle_project(double r) { return std::clamp(r, -1.0, 1.0); }

double subdiff_residual(std::span<const double> phi, std::span<const double> xi, double contact_tol) {
  if (phi.size() != xi.size()) throw StructuralError("subdiff_residual: phi and xi sizes differ");
  double worst = 0.0;
  for (std::size_t n = 0; n < phi.size(); ++n) {
    double v = 0.0;
    if (std::abs(phi[n]) > 1.0 + contact_tol) {
      v = std::abs(phi[n]) - 1.0;
    } else if (std::abs(phi[n] - 1.0) <= contact_tol) {
      v = std::max(0.0, -xi[n]);
    } else if (std::abs(phi[n] + 1.0) <= contact_tol) {
      v = std::max(0.0, xi[n]);
    } else {
      v = std::abs(xi[n]);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

Derivs f2_derivs(double r, const PotentialSpec& spec) {
  if (spec.custom_f2) return spec.custom_f2->eval(r);
  const double k = spec.f2_coefficient;
  return {k * (1.0 - r * r), -2.0 * k * r, -2.0 * k};
}

}  // namespace pfoc
