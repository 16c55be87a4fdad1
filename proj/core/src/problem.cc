#include "totalctl/problem.h"

#include <cmath>
#include <stdexcept>

namespace totalctl {
namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument("problem: " + message);
}

bool nonnegative(double v) { return v >= 0.0 && std::isfinite(v); }

}  // namespace

void ProblemSpec::validate() const {
  require(semigroup != nullptr, "semigroup is missing");
  require(control_operator.rows() == dim(),
          "control operator rows must match the state dimension");
  require(control_operator.cols() >= 1, "control operator has no columns");
  require(control_operator.allFinite(), "control operator is not finite");
  require(delay > 0.0 && std::isfinite(delay), "delay beta must be positive");
  require(static_cast<int>(impulses.size()) == mesh.num_impulses(),
          "need one impulse map per impulse window");
  for (const auto& impulse : impulses) {
    require(static_cast<bool>(impulse), "impulse map is empty");
  }
  require(static_cast<bool>(history), "history data phi is missing");
  if (kernel) {
    require(static_cast<bool>(kernel->kernel) && static_cast<bool>(kernel->integrand),
            "kernel pair is incomplete");
    require(!nonlinearity, "integro variant takes no separate nonlinearity");
    require(!nonlocal, "integro variant has no nonlocal term");
  }

  const auto& c = constants;
  require(c.semigroup_bound >= 1.0, "declared K must be >= 1");
  for (double v : {c.control_norm, c.delay_lipschitz, c.forcing_bound,
                   c.nonlocal_lipschitz, c.nonlocal_bound, c.kernel_lipschitz,
                   c.kernel_bound}) {
    require(nonnegative(v), "declared constants must be nonnegative");
  }
  const auto n = static_cast<std::size_t>(mesh.num_impulses());
  require(c.impulse_lipschitz.size() == n && c.impulse_bound.size() == n,
          "need one impulse Lipschitz constant and bound per impulse");
  for (std::size_t j = 0; j < n; ++j) {
    require(nonnegative(c.impulse_lipschitz[j]) && nonnegative(c.impulse_bound[j]),
            "declared impulse constants must be nonnegative");
  }
}

double NumericsConfig::ridge_for(int window) const {
  if (window >= 0 && window < static_cast<int>(window_ridge.size())) {
    return window_ridge[window];
  }
  return ridge;
}

void NumericsConfig::validate() const {
  if (!(time_step > 0.0)) throw std::invalid_argument("numerics: time_step must be positive");
  if (min_steps < 1) throw std::invalid_argument("numerics: min_steps must be >= 1");
  if (history_intervals < 1) {
    throw std::invalid_argument("numerics: history_grid must be >= 1");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("numerics: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("numerics: max_iter must be >= 1");
  if (!(delta_floor > 0.0)) {
    throw std::invalid_argument("numerics: delta_floor must be positive");
  }
  if (!(ridge >= 0.0)) throw std::invalid_argument("numerics: ridge must be >= 0");
  for (double r : window_ridge) {
    if (!(r >= 0.0)) throw std::invalid_argument("numerics: window ridge must be >= 0");
  }
  if (jobs < 1) throw std::invalid_argument("numerics: jobs must be >= 1");
}

}  // namespace totalctl
