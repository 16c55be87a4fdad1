#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "oracles.h"
#include "totalctl/certificates.h"
#include "totalctl/transport_example.h"

using namespace totalctl;

namespace {

constexpr double kPi = std::numbers::pi;

HistorySegment flat_segment(const State& value, int intervals, double delay, StateNorm norm) {
  return HistorySegment(value.replicate(1, intervals + 1), delay, norm);
}

TransportConfig small_config() {
  TransportConfig cfg;
  cfg.nodes = 16;
  return cfg;
}

}  // namespace

TEST(TransportConfig, ValidationNamesTheField) {
  auto expect_field = [](TransportConfig cfg, const char* field) {
    try {
      cfg.validate();
      FAIL() << "expected rejection mentioning " << field;
    } catch (const std::invalid_argument& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  auto cfg = small_config();
  cfg.nodes = 3;
  expect_field(cfg, "nodes");
  cfg = small_config();
  cfg.delay = 0.0;
  expect_field(cfg, "delay");
  cfg = small_config();
  cfg.saturation = -1.0;
  expect_field(cfg, "saturation");
  cfg = small_config();
  cfg.nonlocal_instants = {1.5};
  expect_field(cfg, "instant");
  cfg = small_config();
  cfg.targets = std::vector<State>{State::Zero(16)};
  expect_field(cfg, "target");
  EXPECT_NO_THROW(small_config().validate());
}

TEST(Case1, DeclaredConstants) {
  const auto p = build_case1(small_config());
  EXPECT_EQ(p.constants.semigroup_bound, 1.0);
  EXPECT_EQ(p.constants.control_norm, 1.0);
  EXPECT_EQ(p.constants.delay_lipschitz, 0.05);
  EXPECT_NEAR(p.constants.nonlocal_lipschitz, 0.1, 1e-16);
  ASSERT_EQ(p.constants.impulse_lipschitz.size(), 1u);
  EXPECT_EQ(p.constants.impulse_lipschitz[0], 1.0);
  EXPECT_EQ(p.control_operator, Eigen::MatrixXd::Identity(16, 16));
  EXPECT_EQ(p.variant(), ProblemVariant::kSemilinear);
}

TEST(Case1, ZeroGainIsLinearAndOnlyImpulsesRemain) {
  auto cfg = small_config();
  cfg.gain = 0.0;
  cfg.nonlocal_weights = {0.0};
  const auto p = build_case1(cfg);
  EXPECT_FALSE(static_cast<bool>(p.nonlinearity));
  const Discretization disc(p, fixtures::numerics());
  const auto inputs = contraction_inputs(p, disc.gramians());
  EXPECT_EQ(inputs.delay_lipschitz, 0.0);
  EXPECT_EQ(inputs.nonlocal_lipschitz, 0.0);
  const auto est = contraction_for(inputs);
  EXPECT_GE(est.value, 1.0);
}

TEST(Case1, ForcingIsLipschitzInTheDelayedSample) {
  std::mt19937_64 rng(61);
  const auto p = build_case1(small_config());
  const StateNorm norm = p.norm();
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd xs = oracle::gaussian(16, 9, rng, 3.0);
    const Eigen::MatrixXd ys = oracle::gaussian(16, 9, rng, 3.0);
    const HistorySegment x(xs, 1.0, norm), y(ys, 1.0, norm);
    const double lhs = norm(p.nonlinearity(0.5, x) - p.nonlinearity(0.5, y));
    EXPECT_LE(lhs, 0.05 * norm(xs.col(0) - ys.col(0)) + 1e-14);
    EXPECT_LE(norm(p.nonlinearity(0.5, x)), p.constants.forcing_bound + 1e-14);
    const auto fx = flat_segment(xs.col(0), 8, 1.0, norm);
    const auto fy = flat_segment(ys.col(0), 8, 1.0, norm);
    EXPECT_LE(norm(p.nonlinearity(0.5, fx) - p.nonlinearity(0.5, fy)),
              p.constants.delay_lipschitz * d_norm(fx - fy) + 1e-14);
  }
}

TEST(Case1, HistoryMatchesPointwiseFormula) {
  const auto history = transport_history(16);
  const ShiftSemigroup grid(16);
  for (double t : {-1.0, -0.5, 0.0}) {
    const State v = history(t);
    for (int i = 0; i < 16; ++i) EXPECT_EQ(v(i), std::sin(grid.node(i)) * (1 + t));
  }
}

TEST(Case2, DeclaredConstantsAndKernelMass) {
  const auto p = build_case2(small_config());
  EXPECT_EQ(p.variant(), ProblemVariant::kIntegro);
  EXPECT_EQ(p.constants.kernel_lipschitz, 0.5);
  EXPECT_EQ(p.constants.kernel_bound, 1.0);
  EXPECT_NEAR(kernel_mass(p), 0.5, 1e-10);
  EXPECT_FALSE(static_cast<bool>(p.nonlocal));
  auto cfg = small_config();
  cfg.mesh = TimeMesh({0.0, 0.6, 2.0}, {0.0, 1.0}, 2.0);
  EXPECT_NEAR(kernel_mass(build_case2(cfg)), 2.0, 1e-10);
  cfg.saturation = 1.0;
  EXPECT_NEAR(build_case2(cfg).constants.kernel_lipschitz, 1.0 / 3.0, 1e-16);
}

TEST(Case2, IntegrandIsBoundedAndLipschitz) {
  std::mt19937_64 rng(62);
  const auto p = build_case2(small_config());
  const StateNorm norm = p.norm();
  const auto& q = p.kernel->integrand;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double t = oracle::uniform(rng, 0.0, 1.0);
    const Eigen::MatrixXd xs = oracle::gaussian(16, 9, rng, 5.0);
    const Eigen::MatrixXd ys = oracle::gaussian(16, 9, rng, 5.0);
    const HistorySegment x(xs, 1.0, norm), y(ys, 1.0, norm);
    const State qx = q(t, x);
    worst = std::max(worst, qx.cwiseAbs().maxCoeff());
    EXPECT_LE(norm(qx - q(t, y)), p.constants.kernel_lipschitz * norm(xs.col(0) - ys.col(0)) + 1e-14);
  }
  EXPECT_LE(worst, p.constants.kernel_bound);
  EXPECT_LE(worst, 1.0 / 2.0 * 1.0 / 2.0 + 1e-15);
}

TEST(Case2, NonlocalTermIsZero) {
  const Discretization disc(build_case2(small_config()), fixtures::numerics());
  const auto x = oracle::sample_path(disc, [](double t) { return State::Constant(16, 1 + t); });
  EXPECT_EQ(nonlocal_term(x, disc.problem()).norm(), 0.0);
}

TEST(ShiftSemigroupFactory, NilpotentAtPi) {
  std::mt19937_64 rng(63);
  const auto op = shift_semigroup(8);
  EXPECT_EQ(op->declared_bound(), 1.0);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(op->apply(kPi, oracle::gaussian(8, 1, rng)).norm(), 0.0);
  }
}

TEST(Targets, SmoothUnitFieldsAreSeeded) {
  const auto a = smooth_random_targets(32, 3, 5);
  const auto b = smooth_random_targets(32, 3, 5);
  const auto c = smooth_random_targets(32, 3, 6);
  const StateNorm norm(kPi / 32);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(a[j], b[j]);
    EXPECT_NEAR(norm(a[j]), 1.0, 1e-12);
  }
  EXPECT_NE(a[0], c[0]);
  auto cfg = small_config();
  cfg.targets = std::vector<State>{State::Ones(16), State::Zero(16)};
  EXPECT_EQ(transport_targets(cfg)[0], State::Ones(16));
}

TEST(Pipelines, BothVariantsHitTheirTargets) {
  for (bool integro : {false, true}) {
    const auto cfg = small_config();
    const Discretization disc(integro ? build_case2(cfg) : build_case1(cfg), fixtures::numerics());
    const auto targets = transport_targets(cfg);
    const auto report = picard_solve(disc, targets);
    EXPECT_TRUE(report.converged);
    for (double d : report.per_window_defect) EXPECT_LE(d, 1e-3) << integro;
  }
}

TEST(Pipelines, DelayedHistoryIsActuallyRead) {
  // Point delay beta = 1 on b = 1: the forcing only reads phi on [-1, 0].
  auto cfg = small_config();
  cfg.gain = 0.5;
  auto base = build_case1(cfg);
  auto early = base;
  early.history = [h = base.history](double t) {
    State v = h(t);
    if (t <= -0.5) v.array() += 0.3;
    return v;
  };
  const auto targets = transport_targets(cfg);
  const auto a = picard_solve(Discretization(base, fixtures::numerics()), targets);
  const auto b = picard_solve(Discretization(early, fixtures::numerics()), targets);
  EXPECT_GT(pc_norm(a.trajectory - b.trajectory), 1e-4);
}
