#include "totalctl/time_mesh.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace totalctl {

TimeMesh::TimeMesh(std::vector<double> theta, std::vector<double> lambda,
                   double horizon)
    : theta_(std::move(theta)), lambda_(std::move(lambda)), horizon_(horizon) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw std::invalid_argument("TimeMesh: horizon b must be positive");
  }
  if (lambda_.empty() || theta_.size() != lambda_.size() + 1) {
    throw std::invalid_argument(
        "TimeMesh: need n+2 theta instants and n+1 lambda instants, got " +
        std::to_string(theta_.size()) + " and " +
        std::to_string(lambda_.size()));
  }
  if (theta_.front() != 0.0 || lambda_.front() != 0.0) {
    throw std::invalid_argument("TimeMesh: theta_0 and lambda_0 must be 0");
  }
  if (theta_.back() != horizon_) {
    throw std::invalid_argument("TimeMesh: theta_{n+1} must equal b");
  }
  // 0 = lambda_0 < theta_1 < lambda_1 < ... < lambda_n < theta_{n+1}.
  double previous = lambda_.front();
  for (std::size_t j = 1; j < theta_.size(); ++j) {
    if (!(theta_[j] > previous)) {
      throw std::invalid_argument("TimeMesh: theta_" + std::to_string(j) +
                                  " does not follow the previous breakpoint");
    }
    previous = theta_[j];
    if (j < lambda_.size()) {
      if (!(lambda_[j] > previous)) {
        throw std::invalid_argument("TimeMesh: lambda_" + std::to_string(j) +
                                    " must exceed theta_" + std::to_string(j));
      }
      previous = lambda_[j];
    }
  }
}

TimeMesh TimeMesh::FromBreakpoints(std::span<const double> breakpoints,
                                   double horizon) {
  if (breakpoints.size() < 2 || breakpoints.size() % 2 != 0) {
    throw std::invalid_argument(
        "TimeMesh: alternating breakpoint list must have even length >= 2");
  }
  std::vector<double> theta{breakpoints[0]};
  std::vector<double> lambda{breakpoints[0]};
  for (std::size_t i = 1; i + 1 < breakpoints.size(); i += 2) {
    theta.push_back(breakpoints[i]);
    lambda.push_back(breakpoints[i + 1]);
  }
  theta.push_back(breakpoints.back());
  return TimeMesh(std::move(theta), std::move(lambda), horizon);
}

MeshInterval TimeMesh::control_window(int j) const {
  if (j < 0 || j > num_impulses()) {
    throw std::out_of_range("TimeMesh: control window index out of range");
  }
  return {IntervalKind::kControl, j, lambda_[j], theta_[j + 1]};
}

MeshInterval TimeMesh::impulse_window(int j) const {
  if (j < 1 || j > num_impulses()) {
    throw std::out_of_range("TimeMesh: impulse window index out of range");
  }
  return {IntervalKind::kImpulse, j, theta_[j], lambda_[j]};
}

std::vector<MeshInterval> TimeMesh::intervals() const {
  std::vector<MeshInterval> out;
  out.push_back(control_window(0));
  for (int j = 1; j <= num_impulses(); ++j) {
    out.push_back(impulse_window(j));
    out.push_back(control_window(j));
  }
  return out;
}

}  // namespace totalctl
