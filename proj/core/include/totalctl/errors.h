#pragma once

#include <stdexcept>
#include <string>

namespace totalctl {

/// A window Gramian whose smallest eigenvalue (after any ridge) falls below
/// the configured floor.
class NotInvertible : public std::runtime_error {
 public:
  NotInvertible(int window, double min_eig, double floor)
      : std::runtime_error("Gramian of window " + std::to_string(window) +
                           " is not invertible: min eigenvalue " +
                           std::to_string(min_eig) + " < floor " +
                           std::to_string(floor)),
        window_(window),
        min_eig_(min_eig),
        floor_(floor) {}

  int window() const { return window_; }
  double min_eig() const { return min_eig_; }
  double floor() const { return floor_; }

 private:
  int window_;
  double min_eig_;
  double floor_;
};

/// Picard iteration exhausted its budget (or blew up) without meeting the
/// tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double final_update, double measured_ratio)
      : std::runtime_error("Picard iteration did not converge after " +
                           std::to_string(iterations) +
                           " sweeps (last update " + std::to_string(final_update) +
                           ", measured ratio " + std::to_string(measured_ratio) + ")"),
        iterations_(iterations),
        final_update_(final_update),
        measured_ratio_(measured_ratio) {}

  int iterations() const { return iterations_; }
  double final_update() const { return final_update_; }
  double measured_ratio() const { return measured_ratio_; }

 private:
  int iterations_;
  double final_update_;
  double measured_ratio_;
};

}  // namespace totalctl
