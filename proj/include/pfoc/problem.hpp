#pragma once

#include "pfoc/geometry.hpp"
#include "pfoc/objective.hpp"
#include "pfoc/potentials.hpp"
#include "pfoc/state_solver.hpp"

namespace pfoc {

/// Everything needed to evaluate the reduced cost: data, potential, objective, box and tolerances.
struct Problem {
  GridSpec grid;
  TimeGrid time;
  ModelParams model;
  InitialData init;
  PotentialSpec potential;
  ObjectiveSpec objective;
  ControlField control;
  SolverOptions solver;

  void validate() const {
    model.validate();
    potential.validate();
    init.validate(grid);
    objective.validate(grid, time);
    control.validate(grid, time);
  }

  Problem with_potential(const PotentialSpec& p) const {
    Problem copy = *this;
    copy.potential = p;
    return copy;
  }
};

}  // namespace pfoc
