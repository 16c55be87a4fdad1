#pragma once

#include "totalctl/mild_solver.h"

namespace totalctl {

/// Independent ground truth for linear problems: classical fourth-order
/// Runge-Kutta on x' = Ax + Bu, `refinement` substeps per solver cell,
/// with the impulse maps applied on impulse windows. The control is read
/// piecewise linearly from its samples. Returns samples on disc's grid.
///
/// Throws std::invalid_argument unless the problem is linear and the
/// semigroup exposes a generator matrix.
PiecewiseTrajectory oracle_linear(const Discretization& disc,
                                  const ControlSignal& control, int refinement = 10);

}  // namespace totalctl
