#pragma once

#include <Eigen/Dense>

#include "totalctl/problem.h"
#include "totalctl/semigroup.h"
#include "totalctl/time_mesh.h"

namespace totalctl {

/// Controllability Gramian of one control window,
///   G_j = int_{lambda_j}^{theta_{j+1}} T(theta_{j+1}-s) B B* T(theta_{j+1}-s)* ds,
/// together with its spectral floor and a Cholesky factor of G_j + ridge*I.
struct GramianBlock {
  int window{0};
  Eigen::MatrixXd matrix;
  double min_eig{0.0};
  double ridge{0.0};
  double delta_floor{1e-8};
  Eigen::LLT<Eigen::MatrixXd> factor;
  bool factored{false};

  /// Smallest eigenvalue of the matrix that is actually inverted.
  double realized_floor() const { return min_eig + ridge; }
  bool invertible() const { return factored && realized_floor() >= delta_floor; }
};

/// Trapezoid assembly on the grid lambda_j + k*h, k = 0..table.count(), with
/// h = table.step(); T(theta_{j+1} - s_k) is table entry count()-k.
GramianBlock assemble_gramian(const PropagatorTable& table,
                              const Eigen::MatrixXd& control_operator, int window,
                              double delta_floor = 1e-8, double ridge = 0.0);

/// Convenience overload: `quad_steps` uniform trapezoid cells over `window`.
/// Throws std::invalid_argument for a zero-length window or quad_steps < 2.
GramianBlock assemble_gramian(const SemigroupOperator& semigroup,
                              const Eigen::MatrixXd& control_operator,
                              const MeshInterval& window, int quad_steps,
                              double delta_floor = 1e-8, double ridge = 0.0);

/// Solves (G + ridge*I) w = v. Throws NotInvertible when the block is below
/// its floor.
State gramian_solve(const GramianBlock& gramian, const State& v);

/// u_j(t) = B* T(theta_{j+1} - t)* G_j^{-1} p for t in the closed window.
State control_value(const SemigroupOperator& semigroup,
                    const Eigen::MatrixXd& control_operator,
                    const GramianBlock& gramian, const MeshInterval& window,
                    double t, const State& residual);

/// A-priori bound on sup ||u_j||:
///   semilinear: (MK/delta_j)[|z_j| + K(|phi(0)| + nu_bound) + K N b]  (j = 0)
///               (MK/delta_j)[|z_j| + K C_j + K N b]                    (j >= 1)
///   integro:    N b is replaced by S b kappa_b and nu_bound is dropped.
double control_bound(const ProblemSpec& problem, int window, const State& target,
                     double realized_delta, double kernel_mass = 0.0);

}  // namespace totalctl
