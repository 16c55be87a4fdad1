#include "totalctl/certificates.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace totalctl {
namespace {

// 1 + M^2 K^2 b / d, infinite for a degenerate floor.
double amplification(const ContractionInputs& in, double floor) {
  if (!(floor > 0.0)) return std::numeric_limits<double>::infinity();
  const double mk = in.control_norm * in.semigroup_bound;
  return 1.0 + mk * mk * in.horizon / floor;
}

// factor * bracket with 0 * inf read as 0: a vanishing Lipschitz bracket
// contributes nothing however badly conditioned the window is.
double scaled(double factor, double bracket) {
  return bracket == 0.0 ? 0.0 : factor * bracket;
}

void check_inputs(const ContractionInputs& in) {
  if (in.window_floor.size() != in.impulse_lipschitz.size() + 1) {
    throw std::invalid_argument("contraction: need n+1 window floors for n impulses");
  }
}

void consider(ContractionEstimate& best, double value, ContractionBranch branch,
              int window) {
  if (value > best.value || (std::isnan(value) && !std::isnan(best.value))) {
    best = {value, branch, window};
  }
}

ContractionEstimate contraction_impl(const ContractionInputs& in, bool integro) {
  check_inputs(in);
  const double k = in.semigroup_bound;
  const double b = in.horizon;
  const double g = horizon_delay_ratio(in.horizon, in.delay);
  const double delay_term = integro ? k * in.kernel_lipschitz * in.kernel_mass * g * b
                                    : k * in.delay_lipschitz * g * b;

  ContractionEstimate best;
  const double first_bracket = integro ? delay_term : delay_term + k * in.nonlocal_lipschitz;
  consider(best, scaled(amplification(in, in.window_floor[0]), first_bracket),
           ContractionBranch::kFirstWindow, 0);
  for (std::size_t j = 1; j < in.window_floor.size(); ++j) {
    const double bracket = delay_term + k * in.impulse_lipschitz[j - 1];
    consider(best, scaled(amplification(in, in.window_floor[j]), bracket),
             ContractionBranch::kLaterWindow, static_cast<int>(j));
  }
  for (std::size_t j = 0; j < in.impulse_lipschitz.size(); ++j) {
    consider(best, in.impulse_lipschitz[j], ContractionBranch::kImpulseLipschitz,
             static_cast<int>(j + 1));
  }
  return best;
}

}  // namespace

const char* to_string(ContractionBranch branch) {
  switch (branch) {
    case ContractionBranch::kFirstWindow: return "first_window";
    case ContractionBranch::kLaterWindow: return "later_window";
    case ContractionBranch::kImpulseLipschitz: return "impulse_lipschitz";
    case ContractionBranch::kNone: break;
  }
  return "none";
}

double horizon_delay_ratio(double horizon, double delay) {
  if (!(delay > 0.0)) throw std::invalid_argument("delay must be positive");
  return horizon / delay;
}

double horizon_delay_ratio(const ProblemSpec& problem) {
  return horizon_delay_ratio(problem.mesh.horizon(), problem.delay);
}

double kernel_mass(const ProblemSpec& problem) {
  if (!problem.kernel) return 0.0;
  const auto& kernel = problem.kernel->kernel;
  auto integrand = [&kernel](double s) { return std::abs(kernel(s)); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, problem.mesh.horizon(), 15, 1e-14);
}

ContractionEstimate contraction_constant(const ContractionInputs& in) {
  return contraction_impl(in, false);
}

ContractionEstimate contraction_constant_integro(const ContractionInputs& in) {
  return contraction_impl(in, true);
}

ContractionEstimate contraction_for(const ContractionInputs& in) {
  return in.variant == ProblemVariant::kIntegro ? contraction_constant_integro(in)
                                                : contraction_constant(in);
}

ContractionInputs contraction_inputs(const ProblemSpec& problem,
                                     std::span<const GramianBlock> gramians) {
  const auto& c = problem.constants;
  ContractionInputs in;
  in.variant = problem.variant();
  in.semigroup_bound = c.semigroup_bound;
  in.control_norm = c.control_norm;
  in.horizon = problem.mesh.horizon();
  in.delay = problem.delay;
  in.delay_lipschitz = c.delay_lipschitz;
  in.nonlocal_lipschitz = c.nonlocal_lipschitz;
  in.kernel_lipschitz = c.kernel_lipschitz;
  in.kernel_mass = kernel_mass(problem);
  in.impulse_lipschitz = c.impulse_lipschitz;
  for (const auto& g : gramians) in.window_floor.push_back(g.realized_floor());
  return in;
}

double solution_bound(const SolutionBoundInputs& in) {
  const double k = in.semigroup_bound;
  const double b = in.horizon;
  const bool integro = in.variant == ProblemVariant::kIntegro;
  const double steering = in.control_norm * k * in.control_bound * b;
  const double forcing = integro ? k * in.kernel_bound * b * in.kernel_mass
                                 : k * in.forcing_bound * b;
  const double start = integro ? k * in.initial_norm
                               : k * (in.initial_norm + in.nonlocal_bound);
  double bound = steering + forcing + start;
  for (double c : in.impulse_bound) {
    bound = std::max({bound, steering + forcing + k * c, c});
  }
  return bound;
}

Certificate certify(const Discretization& disc, std::span<const State> targets) {
  const auto& problem = disc.problem();
  const auto& gramians = disc.gramians();
  if (targets.size() != gramians.size()) {
    throw std::invalid_argument("certify: need one target per control window");
  }
  Certificate cert;
  cert.variant = problem.variant();
  cert.gamma = horizon_delay_ratio(problem);
  cert.semigroup_bound = problem.constants.semigroup_bound;
  cert.control_norm = problem.constants.control_norm;

  const ContractionInputs in = contraction_inputs(problem, gramians);
  cert.delta = in.window_floor;
  cert.kernel_mass = in.kernel_mass;
  cert.contraction = contraction_for(in);

  double worst_control = 0.0;
  for (std::size_t j = 0; j < gramians.size(); ++j) {
    const double floor = gramians[j].realized_floor();
    const double q = floor > 0.0
                         ? control_bound(problem, static_cast<int>(j), targets[j],
                                         floor, cert.kernel_mass)
                         : std::numeric_limits<double>::infinity();
    cert.control_bounds.push_back(q);
    worst_control = std::max(worst_control, q);
  }

  const auto& c = problem.constants;
  SolutionBoundInputs bound;
  bound.variant = problem.variant();
  bound.semigroup_bound = c.semigroup_bound;
  bound.control_norm = c.control_norm;
  bound.horizon = problem.mesh.horizon();
  bound.forcing_bound = c.forcing_bound;
  bound.kernel_bound = c.kernel_bound;
  bound.kernel_mass = cert.kernel_mass;
  bound.initial_norm = problem.norm()(problem.history(0.0));
  bound.nonlocal_bound = c.nonlocal_bound;
  bound.control_bound = worst_control;
  bound.impulse_bound = c.impulse_bound;
  cert.solution_bound = solution_bound(bound);
  cert.verdict = cert.contraction.value < 1.0;
  return cert;
}

namespace {

State random_state(int dim, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  State v(dim);
  for (int i = 0; i < dim; ++i) v(i) = radius * unit(rng);
  return v;
}

HistorySegment flat_segment(const State& level, double delay, int intervals,
                            const StateNorm& norm) {
  return HistorySegment(level.replicate(1, intervals + 1), delay, norm);
}

void warn_if_low(std::vector<std::string>& warnings, const std::string& name,
                 double declared, double estimate) {
  if (declared + 1e-12 * std::max(1.0, estimate) < estimate) {
    warnings.push_back(name + " declared " + std::to_string(declared) +
                       " is below the sampled estimate " + std::to_string(estimate));
  }
}

}  // namespace

ConstantEstimates sample_constants(const Discretization& disc, int samples,
                                   std::mt19937_64& rng, double radius) {
  const auto& problem = disc.problem();
  const auto& c = problem.constants;
  const StateNorm norm = problem.norm();
  const int dim = problem.dim();
  const int h = disc.numerics().history_intervals;
  const double b = problem.mesh.horizon();
  std::uniform_real_distribution<double> when(0.0, b);

  ConstantEstimates est;
  est.impulse_lipschitz.assign(problem.impulses.size(), 0.0);

  for (int s = 0; s < samples; ++s) {
    const double t = when(rng);
    const State x = random_state(dim, radius, rng);
    const State y = random_state(dim, radius, rng);
    const double gap = norm(x - y);
    if (gap == 0.0) continue;
    const auto sx = flat_segment(x, problem.delay, h, norm);
    const auto sy = flat_segment(y, problem.delay, h, norm);
    const double d_gap = d_norm(sx - sy);

    if (problem.nonlinearity) {
      const State fx = problem.nonlinearity(t, sx);
      est.forcing_bound = std::max(est.forcing_bound, norm(fx));
      est.delay_lipschitz = std::max(
          est.delay_lipschitz, norm(fx - problem.nonlinearity(t, sy)) / d_gap);
    }
    if (problem.kernel) {
      const State qx = problem.kernel->integrand(t, sx);
      est.kernel_bound = std::max(est.kernel_bound, norm(qx));
      est.kernel_lipschitz = std::max(
          est.kernel_lipschitz, norm(qx - problem.kernel->integrand(t, sy)) / d_gap);
    }
    for (std::size_t j = 0; j < problem.impulses.size(); ++j) {
      const auto window = problem.mesh.impulse_window(static_cast<int>(j) + 1);
      const double tj = window.start + (window.end - window.start) * (when(rng) / b);
      est.impulse_lipschitz[j] = std::max(
          est.impulse_lipschitz[j],
          norm(problem.impulses[j](tj, x) - problem.impulses[j](tj, y)) / gap);
    }
    if (problem.nonlocal) {
      std::vector<Eigen::MatrixXd> vx, vy;
      for (const auto& grid : disc.grids()) {
        Eigen::MatrixXd px(dim, grid.steps + 1), py(dim, grid.steps + 1);
        for (int i = 0; i <= grid.steps; ++i) {
          px.col(i) = random_state(dim, radius, rng);
          py.col(i) = random_state(dim, radius, rng);
        }
        vx.push_back(std::move(px));
        vy.push_back(std::move(py));
      }
      const auto tx = disc.make_trajectory(std::move(vx));
      const auto ty = disc.make_trajectory(std::move(vy));
      est.nonlocal_lipschitz = std::max(
          est.nonlocal_lipschitz,
          norm(problem.nonlocal(tx) - problem.nonlocal(ty)) / pc_norm(tx - ty));
    }
  }

  warn_if_low(est.warnings, "delay Lipschitz constant", c.delay_lipschitz,
              est.delay_lipschitz);
  warn_if_low(est.warnings, "forcing bound", c.forcing_bound, est.forcing_bound);
  warn_if_low(est.warnings, "kernel Lipschitz constant", c.kernel_lipschitz,
              est.kernel_lipschitz);
  warn_if_low(est.warnings, "kernel integrand bound", c.kernel_bound, est.kernel_bound);
  warn_if_low(est.warnings, "nonlocal Lipschitz constant", c.nonlocal_lipschitz,
              est.nonlocal_lipschitz);
  for (std::size_t j = 0; j < est.impulse_lipschitz.size(); ++j) {
    warn_if_low(est.warnings, "impulse " + std::to_string(j + 1) + " Lipschitz constant",
                c.impulse_lipschitz[j], est.impulse_lipschitz[j]);
  }
  return est;
}

}  // namespace totalctl
