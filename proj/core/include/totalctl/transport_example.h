#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "totalctl/problem.h"
#include "totalctl/semigroup.h"
#include "totalctl/time_mesh.h"

namespace totalctl {

/// Transport equation on [0, pi] with the left-shift semigroup, distributed
/// control B = I and impulses nu_j(t, x) = t x.
struct TransportConfig {
  int nodes{64};
  double delay{1.0};
  TimeMesh mesh{{0.0, 0.3, 1.0}, {0.0, 0.5}, 1.0};
  double gain{0.05};        ///< Amplitude of the delayed sine forcing.
  double saturation{0.0};   ///< Denominator offset of the kernel form, > -1.
  std::vector<double> nonlocal_weights{0.1};
  std::vector<double> nonlocal_instants{0.2};
  /// Assumed a-priori radius of the state; the impulse and nonlocal bounds
  /// are declared relative to it.
  double state_radius{10.0};
  std::uint64_t seed{20240611};
  std::optional<std::vector<State>> targets;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

std::shared_ptr<const ShiftSemigroup> shift_semigroup(int nodes);

/// phi(t, x) = sin(x)(1 + t) on the grid nodes.
HistoryData transport_history(int nodes);

/// Delayed sine forcing with the nonlocal weighted-sample correction.
ProblemSpec build_case1(const TransportConfig& cfg);

/// Kernel form: kernel(s) = s on [0, b], saturating integrand, no nonlocal term.
ProblemSpec build_case2(const TransportConfig& cfg);

/// Smooth random fields of unit norm, one per control window, drawn from a
/// few low sine modes.
std::vector<State> smooth_random_targets(int nodes, int windows, std::uint64_t seed);

/// cfg.targets when set, else smooth_random_targets from cfg.seed.
std::vector<State> transport_targets(const TransportConfig& cfg);

}  // namespace totalctl
