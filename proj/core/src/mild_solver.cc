#include "totalctl/mild_solver.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "totalctl/errors.h"

namespace totalctl {
namespace {

int steps_for(double length, const NumericsConfig& numerics) {
  const double cells = std::ceil(length / numerics.time_step - 1e-9);
  return std::max(numerics.min_steps, static_cast<int>(cells));
}

// Trapezoid accumulation of sum_k w_k T((m-k)h) f_k over k = 0..m.
State propagated_integral(const PropagatorTable& table,
                          const Eigen::MatrixXd& forcing) {
  const int m = table.count();
  const double h = table.step();
  State sum = State::Zero(forcing.rows());
  for (int k = 0; k <= m; ++k) {
    const double w = (k == 0 || k == m) ? 0.5 * h : h;
    sum += w * table.apply(m - k, forcing.col(k));
  }
  return sum;
}

// x_i = T(ih) x0 + trapezoid of T(t_i - s) g(s) over [t_0, t_i], i = 0..m.
Eigen::MatrixXd mild_window(const SemigroupOperator& semigroup,
                            const PropagatorTable& table, const State& start,
                            const Eigen::MatrixXd& drive) {
  const int m = table.count();
  const double h = table.step();
  Eigen::MatrixXd x(start.size(), m + 1);
  x.col(0) = start;
  if (semigroup.composes_exactly()) {
    const Eigen::MatrixXd one = table.matrix(1);
    for (int i = 0; i < m; ++i) {
      x.col(i + 1) = one * (x.col(i) + 0.5 * h * drive.col(i)) +
                     0.5 * h * drive.col(i + 1);
    }
    return x;
  }
  for (int i = 1; i <= m; ++i) {
    State acc = table.apply(i, start + 0.5 * h * drive.col(0));
    for (int k = 1; k < i; ++k) acc += h * table.apply(i - k, drive.col(k));
    acc += 0.5 * h * drive.col(i);
    x.col(i) = acc;
  }
  return x;
}

bool piece_is_control(const TrajectoryPiece& p, int j) {
  return p.interval.kind == IntervalKind::kControl && p.interval.window == j;
}

}  // namespace

double IntervalGrid::time(int i) const {
  if (i == steps) return interval.end;
  return interval.start + interval.length() * static_cast<double>(i) / steps;
}

State ControlSignal::operator()(double t) const {
  for (const auto& piece : pieces) {
    if (t <= piece.interval.end && t >= piece.interval.start) {
      const double pos = (t - piece.interval.start) / piece.step();
      const int last = piece.steps();
      if (pos >= last) return piece.values.col(last);
      const int i0 = std::min(static_cast<int>(std::floor(pos)), last - 1);
      const double frac = pos - i0;
      return (1.0 - frac) * piece.values.col(i0) + frac * piece.values.col(i0 + 1);
    }
  }
  throw std::invalid_argument("ControlSignal: time outside (0, b]");
}

double ControlSignal::window_sup(int j) const {
  for (const auto& piece : pieces) {
    if (!piece_is_control(piece, j)) continue;
    double sup = 0.0;
    for (Eigen::Index i = 0; i < piece.values.cols(); ++i) {
      sup = std::max(sup, norm(piece.values.col(i)));
    }
    return sup;
  }
  throw std::out_of_range("ControlSignal: no such control window");
}

double ControlSignal::sup_norm() const {
  double sup = 0.0;
  for (const auto& piece : pieces) {
    for (Eigen::Index i = 0; i < piece.values.cols(); ++i) {
      sup = std::max(sup, norm(piece.values.col(i)));
    }
  }
  return sup;
}

Discretization::Discretization(ProblemSpec problem, NumericsConfig numerics)
    : problem_(std::move(problem)), numerics_(std::move(numerics)) {
  problem_.validate();
  numerics_.validate();

  int offset = 0;
  for (const auto& interval : problem_.mesh.intervals()) {
    IntervalGrid grid{interval, steps_for(interval.length(), numerics_)};
    global_offsets_.push_back(offset);
    offset += grid.steps;
    grids_.push_back(grid);
  }

  const int windows = problem_.mesh.num_control_windows();
  for (int j = 0; j < windows; ++j) {
    const auto& grid = control_grid(j);
    propagators_.push_back(std::make_unique<PropagatorTable>(
        *problem_.semigroup, grid.step(), grid.steps));
  }

  gramians_.resize(windows);
  auto assemble = [this](int j) {
    return assemble_gramian(*propagators_[j], problem_.control_operator, j,
                            numerics_.delta_floor, numerics_.ridge_for(j));
  };
  if (numerics_.jobs > 1 && windows > 1) {
    std::vector<std::future<GramianBlock>> pending;
    for (int j = 0; j < windows; ++j) {
      pending.push_back(std::async(std::launch::async, assemble, j));
    }
    for (int j = 0; j < windows; ++j) gramians_[j] = pending[j].get();
  } else {
    for (int j = 0; j < windows; ++j) gramians_[j] = assemble(j);
  }

  const int h = numerics_.history_intervals;
  const double beta = problem_.delay;
  history_.resize(problem_.dim(), h + 1);
  for (int i = 0; i <= h; ++i) {
    const double t = (i == h) ? 0.0 : -beta + beta * i / h;
    const State value = problem_.history(t);
    if (value.size() != problem_.dim() || !value.allFinite()) {
      throw std::invalid_argument("problem: history data has the wrong size or is not finite");
    }
    history_.col(i) = value;
  }
}

PiecewiseTrajectory Discretization::make_trajectory(
    std::vector<Eigen::MatrixXd> values) const {
  if (values.size() != grids_.size()) {
    throw std::invalid_argument("Discretization: one sample block per interval");
  }
  std::vector<TrajectoryPiece> pieces;
  pieces.reserve(grids_.size());
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    pieces.push_back({grids_[k].interval, std::move(values[k])});
  }
  return PiecewiseTrajectory(problem_.delay, history_, std::move(pieces),
                             problem_.norm());
}

std::vector<double> Discretization::global_times() const {
  std::vector<double> times{0.0};
  for (const auto& grid : grids_) {
    for (int i = 1; i <= grid.steps; ++i) times.push_back(grid.time(i));
  }
  return times;
}

int Discretization::global_index(int grid_index, int i) const {
  return global_offsets_[grid_index] + i;
}

State apply_impulse(const ProblemSpec& problem, int j, const State& x_minus,
                    double t) {
  const auto window = problem.mesh.impulse_window(j);
  if (t < window.start || t > window.end) {
    throw std::invalid_argument("apply_impulse: time outside the impulse window");
  }
  State value = problem.impulses[j - 1](t, x_minus);
  if (value.size() != x_minus.size()) {
    throw std::invalid_argument("apply_impulse: impulse map changed the dimension");
  }
  return value;
}

State nonlocal_term(const PiecewiseTrajectory& traj, const ProblemSpec& problem) {
  if (!problem.nonlocal) return State::Zero(traj.dim());
  return problem.nonlocal(traj);
}

NonlocalMap weighted_sample_nonlocal(std::vector<double> weights,
                                     std::vector<double> instants, double horizon) {
  if (weights.size() != instants.size()) {
    throw std::invalid_argument("nonlocal: weights and instants differ in length");
  }
  for (double t : instants) {
    if (!(t >= 0.0 && t <= horizon)) {
      throw std::invalid_argument("nonlocal: sample instant outside [0, b]");
    }
  }
  return [weights = std::move(weights),
          instants = std::move(instants)](const PiecewiseTrajectory& traj) {
    State sum = State::Zero(traj.dim());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] != 0.0) sum += weights[i] * traj(instants[i]);
    }
    return sum;
  };
}

State convolve_kernel(double t, const PiecewiseTrajectory& traj,
                      const ProblemSpec& problem) {
  if (!problem.kernel) throw std::invalid_argument("convolve_kernel: no kernel configured");
  if (!(t >= 0.0 && t <= traj.horizon())) {
    throw std::invalid_argument("convolve_kernel: t outside [0, b]");
  }
  std::vector<double> times{0.0};
  for (const auto& piece : traj.pieces()) {
    for (int i = 1; i <= piece.steps(); ++i) {
      const double s = piece.time(i);
      if (s >= t) break;
      times.push_back(s);
    }
    if (piece.interval.end >= t) break;
  }
  if (times.back() < t) times.push_back(t);

  State sum = State::Zero(traj.dim());
  const std::size_t last = times.size() - 1;
  for (std::size_t l = 0; l <= last && last > 0; ++l) {
    const double left = l > 0 ? times[l] - times[l - 1] : 0.0;
    const double right = l < last ? times[l + 1] - times[l] : 0.0;
    const double w = 0.5 * (left + right);
    const double s = times[l];
    sum += w * problem.kernel->kernel(t - s) *
           problem.kernel->integrand(s, history_segment(traj, s));
  }
  return sum;
}

std::vector<Eigen::MatrixXd> forcing_samples(const Discretization& disc,
                                             const PiecewiseTrajectory& iterate) {
  const auto& problem = disc.problem();
  const int windows = problem.mesh.num_control_windows();
  std::vector<Eigen::MatrixXd> out(windows);

  if (problem.variant() == ProblemVariant::kSemilinear) {
    for (int j = 0; j < windows; ++j) {
      const auto& grid = disc.control_grid(j);
      out[j] = Eigen::MatrixXd::Zero(problem.dim(), grid.steps + 1);
      if (!problem.nonlinearity) continue;
      for (int i = 0; i <= grid.steps; ++i) {
        const double t = grid.time(i);
        out[j].col(i) = problem.nonlinearity(t, history_segment(iterate, t));
      }
    }
    return out;
  }

  // Integro variant: q on the whole global grid, then the kernel
  // convolution at every control-window instant.
  const std::vector<double> times = disc.global_times();
  Eigen::MatrixXd q(problem.dim(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t g = 0; g < times.size(); ++g) {
    q.col(static_cast<Eigen::Index>(g)) =
        problem.kernel->integrand(times[g], history_segment(iterate, times[g]));
  }
  for (int j = 0; j < windows; ++j) {
    const auto& grid = disc.control_grid(j);
    out[j] = Eigen::MatrixXd::Zero(problem.dim(), grid.steps + 1);
    for (int i = 0; i <= grid.steps; ++i) {
      const int g = disc.global_index(disc.control_index(j), i);
      const double t = times[g];
      State sum = State::Zero(problem.dim());
      for (int l = 0; l <= g && g > 0; ++l) {
        const double left = l > 0 ? times[l] - times[l - 1] : 0.0;
        const double right = l < g ? times[l + 1] - times[l] : 0.0;
        sum += 0.5 * (left + right) * problem.kernel->kernel(t - times[l]) * q.col(l);
      }
      out[j].col(i) = sum;
    }
  }
  return out;
}

WindowInputs window_inputs(const Discretization& disc,
                           const PiecewiseTrajectory& iterate, int j,
                           const Eigen::MatrixXd& forcing) {
  const auto& problem = disc.problem();
  WindowInputs inputs;
  if (j == 0) {
    inputs.start = problem.history(0.0);
    if (problem.variant() == ProblemVariant::kSemilinear) {
      inputs.start += nonlocal_term(iterate, problem);
    }
  } else {
    const double theta_j = problem.mesh.theta()[j];
    const double lambda_j = problem.mesh.lambda()[j];
    inputs.start = apply_impulse(problem, j, iterate(theta_j), lambda_j);
  }
  inputs.forcing = forcing;
  return inputs;
}

namespace {

State steering_residual(const Discretization& disc, int j,
                        const WindowInputs& inputs, const State& target) {
  const auto& table = disc.propagator(j);
  return target - table.apply(table.count(), inputs.start) -
         propagated_integral(table, inputs.forcing);
}

State residual_for_variant(const Discretization& disc, int j,
                           const PiecewiseTrajectory& iterate, const State& target,
                           ProblemVariant expected) {
  if (disc.problem().variant() != expected) {
    throw std::invalid_argument(expected == ProblemVariant::kIntegro
                                    ? "residual_h: problem has no kernel"
                                    : "residual_p: problem is in kernel form");
  }
  const auto forcing = forcing_samples(disc, iterate);
  return steering_residual(disc, j, window_inputs(disc, iterate, j, forcing.at(j)),
                           target);
}

}  // namespace

State residual_p(const Discretization& disc, int j,
                 const PiecewiseTrajectory& iterate, const State& target) {
  return residual_for_variant(disc, j, iterate, target, ProblemVariant::kSemilinear);
}

State residual_h(const Discretization& disc, int j,
                 const PiecewiseTrajectory& iterate, const State& target) {
  return residual_for_variant(disc, j, iterate, target, ProblemVariant::kIntegro);
}

SweepResult evaluate_operator(const Discretization& disc,
                              const PiecewiseTrajectory& iterate,
                              std::span<const State> targets) {
  const auto& problem = disc.problem();
  const int windows = problem.mesh.num_control_windows();
  if (static_cast<int>(targets.size()) != windows) {
    throw std::invalid_argument("evaluate_operator: need one target per control window");
  }
  const auto& b = problem.control_operator;
  const auto forcing = forcing_samples(disc, iterate);

  std::vector<Eigen::MatrixXd> states(disc.grids().size());
  std::vector<Eigen::MatrixXd> controls(disc.grids().size());
  std::vector<State> residuals(windows);

  for (int j = 0; j < windows; ++j) {
    const auto& table = disc.propagator(j);
    const int m = table.count();
    const WindowInputs inputs = window_inputs(disc, iterate, j, forcing[j]);
    residuals[j] = steering_residual(disc, j, inputs, targets[j]);
    const State w = gramian_solve(disc.gramians()[j], residuals[j]);

    Eigen::MatrixXd u(b.cols(), m + 1);
    for (int k = 0; k <= m; ++k) {
      u.col(k) = b.transpose() * table.apply_adjoint(m - k, w);
    }
    const Eigen::MatrixXd drive = b * u + inputs.forcing;
    states[disc.control_index(j)] =
        mild_window(*problem.semigroup, table, inputs.start, drive);
    controls[disc.control_index(j)] = std::move(u);
  }

  for (int j = 1; j < windows; ++j) {
    const auto& grid = disc.grids()[disc.impulse_index(j)];
    const State x_minus = iterate(problem.mesh.theta()[j]);
    Eigen::MatrixXd values(problem.dim(), grid.steps + 1);
    for (int i = 0; i <= grid.steps; ++i) {
      values.col(i) = apply_impulse(problem, j, x_minus, grid.time(i));
    }
    states[disc.impulse_index(j)] = std::move(values);
    controls[disc.impulse_index(j)] =
        Eigen::MatrixXd::Zero(problem.control_dim(), grid.steps + 1);
  }

  ControlSignal control;
  control.norm = problem.norm();
  for (std::size_t k = 0; k < disc.grids().size(); ++k) {
    control.pieces.push_back({disc.grids()[k].interval, std::move(controls[k])});
  }
  return {disc.make_trajectory(std::move(states)), std::move(control),
          std::move(residuals)};
}

PiecewiseTrajectory initial_iterate(const Discretization& disc) {
  const auto& problem = disc.problem();
  const State phi0 = problem.history(0.0);

  auto flat = [&](const State& level) {
    std::vector<Eigen::MatrixXd> values;
    for (const auto& grid : disc.grids()) {
      values.push_back(level.replicate(1, grid.steps + 1));
    }
    return disc.make_trajectory(std::move(values));
  };

  State level = phi0;
  if (problem.variant() == ProblemVariant::kSemilinear && problem.nonlocal) {
    level += nonlocal_term(flat(phi0), problem);
  }
  std::vector<Eigen::MatrixXd> values;
  for (const auto& grid : disc.grids()) {
    if (grid.interval.kind == IntervalKind::kImpulse) {
      Eigen::MatrixXd block(problem.dim(), grid.steps + 1);
      for (int i = 0; i <= grid.steps; ++i) {
        block.col(i) = apply_impulse(problem, grid.interval.window, level, grid.time(i));
      }
      values.push_back(std::move(block));
    } else {
      values.push_back(level.replicate(1, grid.steps + 1));
    }
  }
  return disc.make_trajectory(std::move(values));
}

SolveReport picard_solve(const Discretization& disc, std::span<const State> targets) {
  const auto& numerics = disc.numerics();
  PiecewiseTrajectory current = initial_iterate(disc);
  std::vector<double> updates;
  double measured_ratio = 0.0;

  for (int k = 1; k <= numerics.max_iter; ++k) {
    SweepResult sweep = evaluate_operator(disc, current, targets);
    const double scale = std::max(1.0, pc_norm(sweep.trajectory));
    const double update = pc_norm(sweep.trajectory - current);
    if (!std::isfinite(update) || !std::isfinite(scale)) {
      throw NonConvergence(k, update, measured_ratio);
    }
    // Increments at round-off level carry no contraction information.
    if (!updates.empty() && updates.back() > 1e-13 * scale) {
      measured_ratio = std::max(measured_ratio, update / updates.back());
    }
    updates.push_back(update);
    current = std::move(sweep.trajectory);

    if (update <= numerics.tol * scale) {
      SolveReport report{std::move(current), std::move(sweep.control),
                         std::move(sweep.residuals), k, update, {}, {}, true,
                         measured_ratio};
      report.updates = std::move(updates);
      const auto& mesh = disc.problem().mesh;
      for (int j = 0; j < mesh.num_control_windows(); ++j) {
        report.per_window_defect.push_back(report.trajectory.norm()(
            report.trajectory(mesh.theta()[j + 1]) - targets[j]));
      }
      return report;
    }
  }
  throw NonConvergence(numerics.max_iter, updates.empty() ? 0.0 : updates.back(),
                       measured_ratio);
}

TargetVerdict verify_targets(const SolveReport& report,
                             std::span<const State> targets, double tol_hit) {
  if (!report.converged) {
    throw std::logic_error("verify_targets: refusing to judge an unconverged solve");
  }
  TargetVerdict verdict;
  const auto& traj = report.trajectory;
  int windows = 0;
  for (const auto& piece : traj.pieces()) {
    if (piece.interval.kind == IntervalKind::kControl) ++windows;
  }
  if (static_cast<int>(targets.size()) != windows) {
    throw std::invalid_argument("verify_targets: need one target per control window");
  }
  for (const auto& piece : traj.pieces()) {
    if (piece.interval.kind != IntervalKind::kControl) continue;
    const int j = piece.interval.window;
    const double defect =
        traj.norm()(piece.values.col(piece.steps()) - targets[j]);
    verdict.defects.push_back(defect);
    verdict.hit.push_back(defect <= tol_hit);
  }
  verdict.totally_controllable =
      std::all_of(verdict.hit.begin(), verdict.hit.end(), [](bool h) { return h; });
  verdict.exactly_controllable = verdict.hit.back();
  for (std::size_t j = 0; j < verdict.hit.size(); ++j) {
    if (!verdict.hit[j]) {
      verdict.first_miss = static_cast<int>(j);
      break;
    }
  }
  return verdict;
}

}  // namespace totalctl
