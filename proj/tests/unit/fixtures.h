#pragma once

#include <memory>
#include <random>
#include <vector>

#include "totalctl/mild_solver.h"

namespace fixtures {

using totalctl::ProblemSpec;
using totalctl::State;

// x' = Ax + Bu with constant history `phi0`; impulses nu_j(t, x) = t x.
inline ProblemSpec linear_problem(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  const State& phi0, totalctl::TimeMesh mesh,
                                  double delay = 1.0) {
  ProblemSpec p;
  p.semigroup = std::make_shared<totalctl::MatrixExponentialSemigroup>(a, 1e3);
  p.control_operator = b;
  p.history = [phi0](double) { return phi0; };
  p.mesh = std::move(mesh);
  p.delay = delay;
  const double horizon = p.mesh.horizon();
  for (int j = 0; j < p.mesh.num_impulses(); ++j) {
    p.impulses.push_back([](double t, const State& x) -> State { return t * x; });
    p.constants.impulse_lipschitz.push_back(horizon);
    p.constants.impulse_bound.push_back(horizon * 10.0);
  }
  p.constants.semigroup_bound = 1e3;
  p.constants.control_norm = b.norm();
  return p;
}

inline ProblemSpec scalar_problem(double a, double phi0, totalctl::TimeMesh mesh = {}) {
  return linear_problem(Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Ones(1, 1),
                        State::Constant(1, phi0), std::move(mesh));
}

inline totalctl::TimeMesh two_window_mesh() {
  return totalctl::TimeMesh({0.0, 0.3, 1.0}, {0.0, 0.5}, 1.0);
}

inline totalctl::NumericsConfig numerics(double step = 1e-2) {
  totalctl::NumericsConfig n;
  n.time_step = step;
  n.history_intervals = 32;
  return n;
}

inline std::vector<State> random_targets(int dim, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<State> out;
  for (int j = 0; j < count; ++j) {
    State z(dim);
    for (int i = 0; i < dim; ++i) z(i) = g(rng);
    out.push_back(z);
  }
  return out;
}

}  // namespace fixtures
