#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "oracles.h"
#include "totalctl/oracle.h"
#include "totalctl/transport_example.h"

using namespace totalctl;

namespace {

ControlSignal constant_control(const Discretization& disc, const State& value) {
  ControlSignal control;
  for (const auto& grid : disc.grids()) {
    const bool active = grid.interval.kind == IntervalKind::kControl;
    control.pieces.push_back(
        {grid.interval, active ? Eigen::MatrixXd(value.replicate(1, grid.steps + 1))
                               : Eigen::MatrixXd::Zero(value.size(), grid.steps + 1)});
  }
  return control;
}

}  // namespace

TEST(OracleLinear, ConstantControlIntegratesExactly) {
  const Discretization disc(fixtures::scalar_problem(0.0, 0.0), fixtures::numerics());
  const auto x = oracle_linear(disc, constant_control(disc, State::Constant(1, 0.6)));
  EXPECT_NEAR(x(1.0)(0), 0.6, 1e-10);
}

TEST(OracleLinear, FreeScalarDecay) {
  for (double a : {-1.5, 0.4}) {
    const Discretization disc(fixtures::scalar_problem(a, 1.0), fixtures::numerics());
    const auto x = oracle_linear(disc, constant_control(disc, State::Zero(1)));
    for (double t : {0.1, 0.5, 1.0}) EXPECT_NEAR(x(t)(0), std::exp(a * t), 1e-8);
  }
}

TEST(OracleLinear, RotationPreservesTheNorm) {
  const Eigen::MatrixXd rot = (Eigen::MatrixXd(2, 2) << 0.0, 2.0, -2.0, 0.0).finished();
  const State start = (State(2) << 0.6, 0.8).finished();
  const Discretization disc(
      fixtures::linear_problem(rot, Eigen::MatrixXd::Identity(2, 2), start, TimeMesh()),
      fixtures::numerics());
  const auto x = oracle_linear(disc, constant_control(disc, State::Zero(2)));
  for (double t : {0.25, 0.5, 1.0}) EXPECT_NEAR(x(t).norm(), 1.0, 1e-8);
}

TEST(OracleLinear, AppliesImpulsesAndResets) {
  const Discretization disc(fixtures::scalar_problem(0.0, 2.0, fixtures::two_window_mesh()),
                            fixtures::numerics());
  const auto x = oracle_linear(disc, constant_control(disc, State::Zero(1)));
  EXPECT_NEAR(x(0.3)(0), 2.0, 1e-12);
  EXPECT_NEAR(x(0.4)(0), 0.8, 1e-12);
  EXPECT_NEAR(x.right_limit(0.5)(0), 1.0, 1e-12);
  EXPECT_NEAR(x(1.0)(0), 1.0, 1e-12);
}

TEST(OracleLinear, AgreesWithTheSteeredSolver) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2 + trial;
    const Discretization disc(
        fixtures::linear_problem(oracle::gaussian(n, n, rng, 1.0 / std::sqrt(n)),
                                 Eigen::MatrixXd::Identity(n, n), oracle::unit(n, rng),
                                 fixtures::two_window_mesh()),
        fixtures::numerics(1e-3));
    const auto report = picard_solve(disc, fixtures::random_targets(n, 2, rng));
    EXPECT_LE(pc_norm(report.trajectory - oracle_linear(disc, report.control)), 1e-5);
  }
}

TEST(OracleLinear, RejectsUnsupportedProblems) {
  TransportConfig cfg;
  cfg.nodes = 8;
  const Discretization shift(build_case1(cfg), fixtures::numerics());
  EXPECT_THROW(oracle_linear(shift, constant_control(shift, State::Zero(8))), std::invalid_argument);
  auto nonlinear = fixtures::scalar_problem(0.0, 0.0);
  nonlinear.nonlinearity = [](double, const HistorySegment& s) { return s.sample(0); };
  const Discretization disc(nonlinear, fixtures::numerics());
  EXPECT_THROW(oracle_linear(disc, constant_control(disc, State::Zero(1))), std::invalid_argument);
}
