#pragma once

#include <vector>

#include <Eigen/Dense>

#include "totalctl/time_mesh.h"

namespace totalctl {

/// A discretized element of the state space.
using State = Eigen::VectorXd;

/// Norm on the discretized state space: sqrt(weight) times the Euclidean
/// norm. Grid discretizations of L^2 use the cell width as the weight, so
/// adjoints stay plain transposes.
class StateNorm {
 public:
  StateNorm() = default;
  explicit StateNorm(double weight);

  double weight() const { return weight_; }
  double operator()(const Eigen::Ref<const State>& v) const;
  double inner(const Eigen::Ref<const State>& a,
               const Eigen::Ref<const State>& b) const;

 private:
  double weight_{1.0};
};

/// The delayed slice x_t(k) = x(t + k), k in [-delay, 0], sampled on the
/// uniform grid k_i = -delay + i * delay / H, i = 0..H.
class HistorySegment {
 public:
  HistorySegment(Eigen::MatrixXd samples, double delay, StateNorm norm = {});

  int dim() const { return static_cast<int>(samples_.rows()); }
  int grid_intervals() const { return static_cast<int>(samples_.cols()) - 1; }
  double delay() const { return delay_; }
  const StateNorm& norm() const { return norm_; }
  const Eigen::MatrixXd& samples() const { return samples_; }

  double offset(int i) const;
  Eigen::VectorXd sample(int i) const { return samples_.col(i); }
  /// Value at offset k in [-delay, 0], linear between grid points.
  State at(double offset) const;

  HistorySegment operator-(const HistorySegment& other) const;

 private:
  Eigen::MatrixXd samples_;
  double delay_;
  StateNorm norm_;
};

/// (1/delay) * trapezoid integral of the pointwise norm over [-delay, 0].
double d_norm(const HistorySegment& segment);

/// Samples of a path on one mesh interval, on a uniform grid of `steps`
/// cells. Column 0 is the right limit at `interval.start`; the last column
/// is the (left-limit) value at `interval.end`.
struct TrajectoryPiece {
  MeshInterval interval;
  Eigen::MatrixXd values;  // dim x (steps + 1)

  int steps() const { return static_cast<int>(values.cols()) - 1; }
  double step() const { return interval.length() / steps(); }
  double time(int i) const;
};

/// A piecewise-continuous path on [-delay, b]: uniform history samples on
/// [-delay, 0] followed by per-interval pieces that tile (0, b]. Jumps are
/// only possible at piece boundaries, where both one-sided values are
/// stored. Evaluation at a breakpoint returns the left limit.
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory(double delay, Eigen::MatrixXd history,
                      std::vector<TrajectoryPiece> pieces, StateNorm norm = {});

  int dim() const { return static_cast<int>(history_.rows()); }
  double delay() const { return delay_; }
  double horizon() const { return pieces_.back().interval.end; }
  int history_intervals() const { return static_cast<int>(history_.cols()) - 1; }
  const Eigen::MatrixXd& history() const { return history_; }
  const std::vector<TrajectoryPiece>& pieces() const { return pieces_; }
  const StateNorm& norm() const { return norm_; }

  /// x(t) for t in [-delay, b], left limit at breakpoints.
  State operator()(double t) const;
  /// x(t+) for t in [0, b); at t = b returns x(b).
  State right_limit(double t) const;

  PiecewiseTrajectory operator-(const PiecewiseTrajectory& other) const;
  PiecewiseTrajectory operator*(double scale) const;

  /// True if the two trajectories share delay, history grid and pieces.
  bool same_layout(const PiecewiseTrajectory& other) const;

 private:
  State evaluate_piece(const TrajectoryPiece& piece, double t) const;
  State evaluate_history(double t) const;

  double delay_;
  Eigen::MatrixXd history_;
  std::vector<TrajectoryPiece> pieces_;
  StateNorm norm_;
};

/// x_t on the trajectory's own history grid; offsets falling below 0 read
/// the history data. Throws std::invalid_argument for t outside [0, b].
HistorySegment history_segment(const PiecewiseTrajectory& traj, double t);

/// Supremum of the state norm over every stored sample on [0, b], both
/// one-sided values at breakpoints included.
double pc_norm(const PiecewiseTrajectory& traj);

}  // namespace totalctl
