#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "totalctl/semigroup.h"
#include "totalctl/time_mesh.h"
#include "totalctl/trajectory.h"

namespace totalctl {

/// eta(t, x_t): history-dependent forcing of the semilinear system.
using Nonlinearity = std::function<State(double t, const HistorySegment& segment)>;
/// nu_j(t, x): value held on the impulse window (theta_j, lambda_j].
using ImpulseMap = std::function<State(double t, const State& x)>;
/// nu(x): nonlocal correction of the initial state.
using NonlocalMap = std::function<State(const PiecewiseTrajectory& traj)>;
/// phi(t) on [-delay, 0].
using HistoryData = std::function<State(double t)>;

/// Forcing of the integro-differential variant:
/// int_0^t kernel(t - s) q(s, x_s) ds.
struct ConvolutionKernel {
  std::function<double(double s)> kernel;
  Nonlinearity integrand;
};

/// Declared assumption constants. Per-impulse entries are indexed by j-1.
struct AssumptionConstants {
  double semigroup_bound{1.0};     ///< K: sup ||T(t)|| on [0, b], K >= 1.
  double control_norm{0.0};        ///< M = ||B||.
  double delay_lipschitz{0.0};     ///< K1: Lipschitz of eta w.r.t. the D-norm.
  double forcing_bound{0.0};       ///< N: sup ||eta||.
  double nonlocal_lipschitz{0.0};  ///< C_nu.
  double nonlocal_bound{0.0};      ///< sup ||nu(x)||.
  double kernel_lipschitz{0.0};    ///< L_q.
  double kernel_bound{0.0};        ///< S: sup ||q||.
  std::vector<double> impulse_lipschitz;  ///< L_{nu_j}.
  std::vector<double> impulse_bound;      ///< C_{nu_j}.
};

enum class ProblemVariant { kSemilinear, kIntegro };

/// Everything that defines one steering problem. Empty callables mean the
/// corresponding term is identically zero.
struct ProblemSpec {
  std::shared_ptr<const SemigroupOperator> semigroup;
  Eigen::MatrixXd control_operator;  ///< B: control coordinates -> state.
  Nonlinearity nonlinearity;
  std::optional<ConvolutionKernel> kernel;
  std::vector<ImpulseMap> impulses;  ///< nu_1..nu_n.
  NonlocalMap nonlocal;
  HistoryData history;
  TimeMesh mesh;
  double delay{1.0};
  AssumptionConstants constants;
  std::string name{"custom"};

  int dim() const { return semigroup ? semigroup->dim() : 0; }
  int control_dim() const { return static_cast<int>(control_operator.cols()); }
  ProblemVariant variant() const {
    return kernel ? ProblemVariant::kIntegro : ProblemVariant::kSemilinear;
  }
  StateNorm norm() const { return semigroup ? semigroup->norm() : StateNorm{}; }
  /// True when the state enters only through the impulse maps.
  bool is_linear() const { return !nonlinearity && !kernel && !nonlocal; }

  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
};

/// Knobs of the discretization and the fixed-point loop.
struct NumericsConfig {
  double time_step{1e-3};   ///< Target step; each interval gets a uniform grid.
  int min_steps{2};         ///< Minimum cells per interval.
  int history_intervals{128};
  double tol{1e-9};
  int max_iter{200};
  double delta_floor{1e-8};
  double ridge{0.0};
  std::vector<double> window_ridge;  ///< Per-window override of `ridge`.
  int jobs{1};

  double ridge_for(int window) const;
  void validate() const;
};

}  // namespace totalctl
