#include "totalctl/oracle.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace totalctl {
namespace {

// Control on one piece at local time s in [0, len], linear between samples.
State piece_control(const TrajectoryPiece& piece, double s) {
  const int last = piece.steps();
  const double pos = std::clamp(s / piece.step(), 0.0, static_cast<double>(last));
  const int i0 = std::min(static_cast<int>(std::floor(pos)), last - 1);
  const double frac = pos - i0;
  return (1.0 - frac) * piece.values.col(i0) + frac * piece.values.col(i0 + 1);
}

}  // namespace

PiecewiseTrajectory oracle_linear(const Discretization& disc,
                                  const ControlSignal& control, int refinement) {
  const auto& problem = disc.problem();
  if (!problem.is_linear()) {
    throw std::invalid_argument("oracle_linear: problem is not linear in the state");
  }
  const auto generator = problem.semigroup->generator();
  if (!generator) {
    throw std::invalid_argument("oracle_linear: semigroup has no generator matrix");
  }
  if (refinement < 1) throw std::invalid_argument("oracle_linear: refinement must be >= 1");
  if (control.pieces.size() != disc.grids().size()) {
    throw std::invalid_argument("oracle_linear: control layout differs from the grid");
  }
  const Eigen::MatrixXd& a = *generator;
  const Eigen::MatrixXd& b = problem.control_operator;
  const int dim = problem.dim();

  std::vector<Eigen::MatrixXd> values;
  State x = problem.history(0.0);
  State before_impulse = x;

  for (std::size_t p = 0; p < disc.grids().size(); ++p) {
    const auto& grid = disc.grids()[p];
    Eigen::MatrixXd block(dim, grid.steps + 1);
    const int j = grid.interval.window;

    if (grid.interval.kind == IntervalKind::kImpulse) {
      before_impulse = x;
      for (int i = 0; i <= grid.steps; ++i) {
        block.col(i) = problem.impulses[j - 1](grid.time(i), before_impulse);
      }
      values.push_back(std::move(block));
      continue;
    }

    if (j > 0) x = problem.impulses[j - 1](problem.mesh.lambda()[j], before_impulse);
    const auto& piece = control.pieces[p];
    const double h = grid.step() / refinement;
    auto rhs = [&](double s, const State& y) -> State {
      return a * y + b * piece_control(piece, s);
    };
    block.col(0) = x;
    for (int i = 0; i < grid.steps; ++i) {
      for (int r = 0; r < refinement; ++r) {
        const double s = grid.step() * i + h * r;
        const State k1 = rhs(s, x);
        const State k2 = rhs(s + 0.5 * h, x + 0.5 * h * k1);
        const State k3 = rhs(s + 0.5 * h, x + 0.5 * h * k2);
        const State k4 = rhs(s + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      block.col(i + 1) = x;
    }
    values.push_back(std::move(block));
  }
  return disc.make_trajectory(std::move(values));
}

}  // namespace totalctl
