#include "totalctl/gramian.h"

#include <stdexcept>

#include "totalctl/errors.h"

namespace totalctl {

GramianBlock assemble_gramian(const PropagatorTable& table,
                              const Eigen::MatrixXd& control_operator, int window,
                              double delta_floor, double ridge) {
  const int m = table.count();
  if (m < 1) throw std::invalid_argument("assemble_gramian: empty window grid");
  const double h = table.step();

  GramianBlock block;
  block.window = window;
  block.ridge = ridge;
  block.delta_floor = delta_floor;
  const Eigen::Index n = control_operator.rows();
  block.matrix = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k <= m; ++k) {
    const double w = (k == 0 || k == m) ? 0.5 * h : h;
    const Eigen::MatrixXd tb = table.matrix(m - k) * control_operator;
    block.matrix.noalias() += w * tb * tb.transpose();
  }
  block.matrix = 0.5 * (block.matrix + block.matrix.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block.matrix,
                                                     Eigen::EigenvaluesOnly);
  block.min_eig = eig.eigenvalues()(0);

  if (block.realized_floor() >= delta_floor) {
    Eigen::MatrixXd regularized = block.matrix;
    regularized.diagonal().array() += ridge;
    block.factor.compute(regularized);
    block.factored = block.factor.info() == Eigen::Success;
  }
  return block;
}

GramianBlock assemble_gramian(const SemigroupOperator& semigroup,
                              const Eigen::MatrixXd& control_operator,
                              const MeshInterval& window, int quad_steps,
                              double delta_floor, double ridge) {
  if (!(window.length() > 0.0)) {
    throw std::invalid_argument("assemble_gramian: degenerate window");
  }
  if (quad_steps < 2) {
    throw std::invalid_argument("assemble_gramian: quad_steps must be >= 2");
  }
  if (control_operator.rows() != semigroup.dim()) {
    throw std::invalid_argument("assemble_gramian: B rows must match the state dimension");
  }
  PropagatorTable table(semigroup, window.length() / quad_steps, quad_steps);
  return assemble_gramian(table, control_operator, window.window, delta_floor,
                          ridge);
}

State gramian_solve(const GramianBlock& gramian, const State& v) {
  if (!gramian.invertible()) {
    throw NotInvertible(gramian.window, gramian.realized_floor(),
                        gramian.delta_floor);
  }
  if (v.size() != gramian.matrix.rows()) {
    throw std::invalid_argument("gramian_solve: dimension mismatch");
  }
  return gramian.factor.solve(v);
}

State control_value(const SemigroupOperator& semigroup,
                    const Eigen::MatrixXd& control_operator,
                    const GramianBlock& gramian, const MeshInterval& window,
                    double t, const State& residual) {
  if (t < window.start || t > window.end) {
    throw std::invalid_argument("control_value: time outside the control window");
  }
  const State w = gramian_solve(gramian, residual);
  return control_operator.transpose() * semigroup.apply_adjoint(window.end - t, w);
}

double control_bound(const ProblemSpec& problem, int window, const State& target,
                     double realized_delta, double kernel_mass) {
  const auto& c = problem.constants;
  const StateNorm norm = problem.norm();
  const double k = c.semigroup_bound;
  const double b = problem.mesh.horizon();
  const bool integro = problem.variant() == ProblemVariant::kIntegro;
  const double forcing = integro ? k * c.kernel_bound * b * kernel_mass
                                 : k * c.forcing_bound * b;
  double start;
  if (window == 0) {
    const double phi0 = norm(problem.history(0.0));
    start = integro ? k * phi0 : k * (phi0 + c.nonlocal_bound);
  } else {
    start = k * c.impulse_bound.at(window - 1);
  }
  return c.control_norm * k / realized_delta * (norm(target) + start + forcing);
}

}  // namespace totalctl
