#pragma once

#include <span>
#include <vector>

namespace totalctl {

enum class IntervalKind { kHistory, kControl, kImpulse };

/// One piece of the mesh partition of (0, b]. Control windows are
/// (lambda_j, theta_{j+1}]; impulse windows are (theta_j, lambda_j].
struct MeshInterval {
  IntervalKind kind{IntervalKind::kControl};
  int window{0};  ///< j for both control and impulse windows.
  double start{0.0};
  double end{0.0};

  double length() const { return end - start; }
};

/// The breakpoints 0 = lambda_0 = theta_0 < theta_1 < lambda_1 < ... <
/// theta_n < lambda_n < theta_{n+1} = b.
///
/// Immutable after construction; the constructor enforces the strict
/// interleaving and throws std::invalid_argument otherwise.
class TimeMesh {
 public:
  /// The single-window mesh on (0, 1].
  TimeMesh() : TimeMesh({0.0, 1.0}, {0.0}, 1.0) {}
  /// theta holds theta_0..theta_{n+1}, lambda holds lambda_0..lambda_n.
  TimeMesh(std::vector<double> theta, std::vector<double> lambda,
           double horizon);

  /// Builds from the alternating list [theta_0, theta_1, lambda_1, ...,
  /// theta_n, lambda_n, theta_{n+1}] (lambda_0 = theta_0 is implied).
  static TimeMesh FromBreakpoints(std::span<const double> breakpoints,
                                  double horizon);

  int num_impulses() const { return static_cast<int>(lambda_.size()) - 1; }
  int num_control_windows() const { return num_impulses() + 1; }
  double horizon() const { return horizon_; }

  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& lambda() const { return lambda_; }

  /// (lambda_j, theta_{j+1}], j = 0..n.
  MeshInterval control_window(int j) const;
  /// (theta_j, lambda_j], j = 1..n.
  MeshInterval impulse_window(int j) const;

  /// Control and impulse windows in time order; they tile (0, b].
  std::vector<MeshInterval> intervals() const;

 private:
  std::vector<double> theta_;
  std::vector<double> lambda_;
  double horizon_;
};

}  // namespace totalctl
