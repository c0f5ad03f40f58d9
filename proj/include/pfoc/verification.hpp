#pragma once

#include <cstdint>
#include <vector>

#include "pfoc/optimizer.hpp"

namespace pfoc {

/// (J(u + h d) - J(u - h d)) / (2h) from two full state solves.
double fd_directional_derivative(const ReducedObjective& objective, const Series& u, const Series& direction,
                                 double h);

struct TaylorReport {
  std::vector<double> steps;
  std::vector<double> remainders;  // |J(u + h d) - J(u) - h <g, d>|
  double derivative = 0.0;         // <g, d> in the control inner product
  double order = 0.0;              // least-squares slope of log remainder vs log h
};

/// Probes for different steps run concurrently on up to `threads` workers.
TaylorReport taylor_order(const ReducedObjective& objective, const Series& u, const Series& direction,
                          const Series& gradient, const std::vector<double>& steps, const GridSpec& grid,
                          const TimeGrid& tg, int threads = 1);

/// Geometric steps h0, h0/2, ..., count entries.
std::vector<double> halving_steps(double h0, int count);

/// Nodal standard-normal field on levels 0..N-1 (level N is zero), scaled to unit L2(Q) norm.
Series random_direction(const GridSpec& grid, const TimeGrid& tg, std::uint64_t seed);

/// Uniform random field in [lo, hi] on every level.
Series random_field(const GridSpec& grid, const TimeGrid& tg, double lo, double hi, std::uint64_t seed);

/// phi' = -gamma ln((1 + phi)/(1 - phi)) integrated by adaptive Dormand-Prince (tol 1e-12); values at t_k.
std::vector<double> scalar_ode_reference(double phi0, double gamma, const TimeGrid& tg);

struct OdeStudy {
  std::vector<int> steps;
  std::vector<double> errors;  // max over levels and nodes of |phi - phi_ode|
  double slope = 0.0;          // slope of log error vs log dt
};

/// Spatially constant, F2 = 0 runs of the state solver against the ODE reference on refined time grids.
OdeStudy scalar_ode_study(double phi0, double gamma, double horizon, const std::vector<int>& steps, int nodes = 9);

}  // namespace pfoc
