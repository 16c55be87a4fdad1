#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "totalctl/gramian.h"
#include "totalctl/problem.h"
#include "totalctl/semigroup.h"
#include "totalctl/trajectory.h"

namespace totalctl {

/// Uniform grid on one mesh interval.
struct IntervalGrid {
  MeshInterval interval;
  int steps{1};

  double step() const { return interval.length() / steps; }
  double time(int i) const;
};

/// Per-window sampled control; identically zero on impulse windows.
struct ControlSignal {
  std::vector<TrajectoryPiece> pieces;  ///< Same layout as the trajectory.
  StateNorm norm;

  int dim() const { return static_cast<int>(pieces.front().values.rows()); }
  /// u(t), linear between samples, left limit at breakpoints.
  State operator()(double t) const;
  /// Largest sampled norm on control window j.
  double window_sup(int j) const;
  double sup_norm() const;
};

/// The shared time grid, propagator tables, history samples and window
/// Gramians of one problem. Immutable once built; the Gramians do not
/// depend on the iterate, so they are assembled here exactly once.
class Discretization {
 public:
  Discretization(ProblemSpec problem, NumericsConfig numerics);

  const ProblemSpec& problem() const { return problem_; }
  const NumericsConfig& numerics() const { return numerics_; }
  const std::vector<IntervalGrid>& grids() const { return grids_; }
  /// Position in grids() of control window j / impulse window j.
  int control_index(int j) const { return 2 * j; }
  int impulse_index(int j) const { return 2 * j - 1; }
  const IntervalGrid& control_grid(int j) const { return grids_[control_index(j)]; }
  const PropagatorTable& propagator(int j) const { return *propagators_[j]; }
  const std::vector<GramianBlock>& gramians() const { return gramians_; }
  const Eigen::MatrixXd& history_samples() const { return history_; }

  /// Builds a trajectory on this grid from per-interval sample matrices.
  PiecewiseTrajectory make_trajectory(std::vector<Eigen::MatrixXd> values) const;
  /// Every grid instant of [0, b] once, in increasing order.
  std::vector<double> global_times() const;
  /// Index into global_times() of sample i of interval `grid_index`.
  int global_index(int grid_index, int i) const;

 private:
  ProblemSpec problem_;
  NumericsConfig numerics_;
  std::vector<IntervalGrid> grids_;
  std::vector<int> global_offsets_;
  std::vector<std::unique_ptr<PropagatorTable>> propagators_;
  std::vector<GramianBlock> gramians_;
  Eigen::MatrixXd history_;
};

/// nu_j(t, x_minus) for t in the closed impulse window [theta_j, lambda_j].
State apply_impulse(const ProblemSpec& problem, int j, const State& x_minus,
                    double t);

/// nu(x), or zero when the problem has no nonlocal term.
State nonlocal_term(const PiecewiseTrajectory& traj, const ProblemSpec& problem);

/// nu(x) = sum_i weights[i] * x(instants[i]); throws std::invalid_argument
/// when an instant lies outside [0, horizon].
NonlocalMap weighted_sample_nonlocal(std::vector<double> weights,
                                     std::vector<double> instants, double horizon);

/// int_0^t kernel(t - s) q(s, x_s) ds by trapezoid over the trajectory's
/// own sample instants in [0, t]. Throws when the problem has no kernel.
State convolve_kernel(double t, const PiecewiseTrajectory& traj,
                      const ProblemSpec& problem);

/// The data entering the steering residual of control window j for a given
/// iterate: the window's initial state and its forcing samples.
struct WindowInputs {
  State start;
  Eigen::MatrixXd forcing;  // dim x (steps + 1)
};

/// Forcing samples for every control window: eta(t, x_t) in the semilinear
/// variant, the kernel convolution in the integro variant.
std::vector<Eigen::MatrixXd> forcing_samples(const Discretization& disc,
                                             const PiecewiseTrajectory& iterate);

WindowInputs window_inputs(const Discretization& disc,
                           const PiecewiseTrajectory& iterate, int j,
                           const Eigen::MatrixXd& forcing);

/// Terminal defect p_j (semilinear) of window j:
///   target - T(len) start - int T(theta_{j+1} - s) eta(s, x_s) ds.
State residual_p(const Discretization& disc, int j,
                 const PiecewiseTrajectory& iterate, const State& target);
/// Terminal defect h_j (integro variant, kernel convolution as forcing).
State residual_h(const Discretization& disc, int j,
                 const PiecewiseTrajectory& iterate, const State& target);

struct SweepResult {
  PiecewiseTrajectory trajectory;
  ControlSignal control;
  std::vector<State> residuals;  ///< p_j (or h_j) used for the control.
};

/// One application of the steered mild-solution operator to `iterate`.
/// Throws NotInvertible if a window Gramian is below its floor.
SweepResult evaluate_operator(const Discretization& disc,
                              const PiecewiseTrajectory& iterate,
                              std::span<const State> targets);

/// phi(0) (+ nu of that flat path) held on every control window, impulse
/// branches applied once.
PiecewiseTrajectory initial_iterate(const Discretization& disc);

struct SolveReport {
  PiecewiseTrajectory trajectory;
  ControlSignal control;
  std::vector<State> residuals;
  int iterations{0};
  double final_update{0.0};
  std::vector<double> updates;
  std::vector<double> per_window_defect;
  bool converged{false};
  double measured_ratio{0.0};
};

/// Picard iteration x_{k+1} = xi(x_k) until the sup-norm update falls below
/// tol * max(1, ||x_{k+1}||). Throws NonConvergence after max_iter sweeps or
/// on a non-finite iterate.
SolveReport picard_solve(const Discretization& disc, std::span<const State> targets);

struct TargetVerdict {
  std::vector<double> defects;
  std::vector<bool> hit;
  bool totally_controllable{false};
  bool exactly_controllable{false};
  int first_miss{-1};
};

/// Per-window ||x(theta_{j+1}) - z_j|| <= tol_hit, their conjunction, and the
/// final-window (exact controllability) verdict. Throws std::logic_error on
/// an unconverged report.
TargetVerdict verify_targets(const SolveReport& report,
                             std::span<const State> targets, double tol_hit);

}  // namespace totalctl
