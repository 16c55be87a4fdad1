#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "totalctl/mild_solver.h"
#include "totalctl/problem.h"

namespace totalctl {

/// Which term of the contraction max-formula attains the maximum.
enum class ContractionBranch { kNone, kFirstWindow, kLaterWindow, kImpulseLipschitz };

const char* to_string(ContractionBranch branch);

struct ContractionEstimate {
  double value{0.0};
  ContractionBranch branch{ContractionBranch::kNone};
  int window{-1};  ///< Control window of the arg-max term, -1 when none.
};

/// Everything the contraction max-formula reads. Pure data so the formula
/// can be evaluated (and perturbed) without a problem instance.
struct ContractionInputs {
  ProblemVariant variant{ProblemVariant::kSemilinear};
  double semigroup_bound{1.0};
  double control_norm{0.0};
  double horizon{1.0};
  double delay{1.0};
  double delay_lipschitz{0.0};
  double nonlocal_lipschitz{0.0};
  double kernel_lipschitz{0.0};
  double kernel_mass{0.0};
  std::vector<double> impulse_lipschitz;  ///< Windows 1..n.
  std::vector<double> window_floor;       ///< Windows 0..n.
};

/// Horizon over delay. Throws std::invalid_argument for delay <= 0.
double horizon_delay_ratio(double horizon, double delay);
double horizon_delay_ratio(const ProblemSpec& problem);

/// int_0^b |kernel(s)| ds by adaptive Gauss-Kronrod quadrature.
double kernel_mass(const ProblemSpec& problem);

/// Semilinear form:
///   max{ max_j (1 + M^2K^2b/d_j)(K K1 g b + K L_j),
///        (1 + M^2K^2b/d_0)(K1 K g b + K C_nu), max_j L_j }.
ContractionEstimate contraction_constant(const ContractionInputs& in);

/// Kernel form:
///   max{ max_j (K L_j + K Lq kb g b)(1 + M^2K^2b/d_j),
///        (1 + M^2K^2b/d_0) K Lq kb g b, max_j L_j }.
ContractionEstimate contraction_constant_integro(const ContractionInputs& in);

/// Dispatches on in.variant.
ContractionEstimate contraction_for(const ContractionInputs& in);

ContractionInputs contraction_inputs(const ProblemSpec& problem,
                                     std::span<const GramianBlock> gramians);

struct SolutionBoundInputs {
  ProblemVariant variant{ProblemVariant::kSemilinear};
  double semigroup_bound{1.0};
  double control_norm{0.0};
  double horizon{1.0};
  double forcing_bound{0.0};
  double kernel_bound{0.0};
  double kernel_mass{0.0};
  double initial_norm{0.0};    ///< ||phi(0)||.
  double nonlocal_bound{0.0};  ///< Ignored in the kernel form.
  double control_bound{0.0};   ///< max_j of the per-window control bounds.
  std::vector<double> impulse_bound;
};

/// Semilinear: max{MKQb + KNb + K(|phi0| + nu_bound),
///                 max_j(MKQb + KNb + K C_j), max_j C_j}.
/// Kernel form: KNb becomes K S b kb and nu_bound is dropped.
double solution_bound(const SolutionBoundInputs& in);

struct Certificate {
  ProblemVariant variant{ProblemVariant::kSemilinear};
  double gamma{0.0};
  double semigroup_bound{0.0};
  double control_norm{0.0};
  std::vector<double> delta;
  double kernel_mass{0.0};
  ContractionEstimate contraction;
  std::vector<double> control_bounds;
  double solution_bound{0.0};
  bool verdict{false};
};

/// Certificate of the discretized problem; the floors are the realized
/// smallest eigenvalues (plus ridge) of the assembled Gramians.
Certificate certify(const Discretization& disc, std::span<const State> targets);

/// Empirical lower estimates of the declared constants from random
/// evaluations. A warning is produced whenever a declared constant is below
/// its estimate.
struct ConstantEstimates {
  double delay_lipschitz{0.0};
  double forcing_bound{0.0};
  double kernel_lipschitz{0.0};
  double kernel_bound{0.0};
  double nonlocal_lipschitz{0.0};
  std::vector<double> impulse_lipschitz;
  std::vector<std::string> warnings;
};

/// Forcing Lipschitz ratios are taken against the D-norm on segments that
/// are constant in the delay offset; the nonlocal ratio uses trajectories
/// on `disc`'s grid.
ConstantEstimates sample_constants(const Discretization& disc, int samples,
                                   std::mt19937_64& rng, double radius = 1.0);

}  // namespace totalctl
