#pragma once

#include <functional>
#include <optional>
#include <span>

#include "pfoc/geometry.hpp"

namespace pfoc {

/// Value and first two derivatives of a scalar potential at one point.
struct Derivs {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// User-supplied smooth part F2 with a Lipschitz bound for F2' on [-1, 1].
struct CustomF2 {
  std::function<Derivs(double)> eval;
  double lipschitz_bound = 0.0;
};

/**
 * Potential selection: the logarithmic family gamma * F1,log or the double
 * obstacle indicator, each combined with a smooth concave part F2.
 *
 * The default F2 is k (1 - r^2); k = 0 decouples the phase equation from
 * the temperature.
 */
struct PotentialSpec {
  enum class Kind { Logarithmic, Obstacle };

  Kind kind = Kind::Logarithmic;
  double gamma = 1.0;
  double f2_coefficient = 0.0;
  std::optional<CustomF2> custom_f2;

  static PotentialSpec logarithmic(double gamma, double k = 0.0);
  static PotentialSpec obstacle(double k = 0.0);

  /// Throws DomainError when gamma is outside (0, 1] or the custom F2 has no finite bound.
  void validate() const;

  bool is_logarithmic() const { return kind == Kind::Logarithmic; }
};

/// (1+r) ln(1+r) + (1-r) ln(1-r) on [-1, 1] with 0 ln 0 = 0.
double f1log_value(double r);

/// gamma * F1,log and its first two derivatives; requires |r| < 1.
Derivs f1gamma_derivs(double r, double gamma);

/// Projection onto [-1, 1].
double obstacle_project(double r);

inline constexpr double kDefaultContactTol = 1e-9;

/**
 * Largest pointwise violation of xi in the subdifferential of I_[-1,1] at phi.
 *
 * Interior nodes need xi = 0, upper contact xi >= 0, lower contact xi <= 0.
 */
double subdiff_residual(std::span<const double> phi, std::span<const double> xi,
                        double contact_tol = kDefaultContactTol);

Derivs f2_derivs(double r, const PotentialSpec& spec);

}  // namespace pfoc
