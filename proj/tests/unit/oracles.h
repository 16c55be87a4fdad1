#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "totalctl/mild_solver.h"
#include "totalctl/semigroup.h"

namespace oracle {

// exp(M) by plain Taylor series after halving M until its norm is small,
// then repeated squaring. Independent of the library's Pade path.
inline Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& m) {
  int squarings = 0;
  double norm = m.lpNorm<Eigen::Infinity>();
  while (norm > 0.125) {
    norm /= 2.0;
    ++squarings;
  }
  const Eigen::MatrixXd scaled = m / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * scaled / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Van Loan: exp([[-A, BB'], [0, A']] t) = [[., F12], [0, F22]], and the
// Gramian int_0^t e^{As} BB' e^{A's} ds equals F22' F12.
inline Eigen::MatrixXd van_loan_gramian(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                        double t) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a;
  block.topRightCorner(n, n) = b * b.transpose();
  block.bottomRightCorner(n, n) = a.transpose();
  const Eigen::MatrixXd f = taylor_expm(block * t);
  return f.bottomRightCorner(n, n).transpose() * f.topRightCorner(n, n);
}

inline Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = scale * g(rng);
  return m;
}

inline Eigen::VectorXd unit(int dim, std::mt19937_64& rng) {
  Eigen::VectorXd v = gaussian(dim, 1, rng);
  return v / v.norm();
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random interleaved mesh on (0, b] with n impulses.
inline totalctl::TimeMesh random_mesh(int n, double b, std::mt19937_64& rng) {
  std::vector<double> cuts;
  for (int k = 0; k < 2 * n; ++k) cuts.push_back(uniform(rng, 0.05, 0.95) * b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> theta{0.0}, lambda{0.0};
  for (int j = 0; j < n; ++j) {
    theta.push_back(cuts[2 * j]);
    lambda.push_back(cuts[2 * j + 1]);
  }
  theta.push_back(b);
  return totalctl::TimeMesh(theta, lambda, b);
}

// Path filled from `value(t)` on every sample of disc's grid.
template <typename F>
totalctl::PiecewiseTrajectory sample_path(const totalctl::Discretization& disc, F value) {
  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& grid : disc.grids()) {
    Eigen::MatrixXd block(disc.problem().dim(), grid.steps + 1);
    for (int i = 0; i <= grid.steps; ++i) block.col(i) = value(grid.time(i));
    blocks.push_back(std::move(block));
  }
  return disc.make_trajectory(std::move(blocks));
}

}  // namespace oracle
