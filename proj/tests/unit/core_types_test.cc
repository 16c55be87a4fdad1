#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "totalctl/time_mesh.h"
#include "totalctl/trajectory.h"

using namespace totalctl;

namespace {

// Scalar trajectory on a single-window mesh (0, b] with `steps` cells.
PiecewiseTrajectory scalar_path(double delay, double b, int steps, int hist,
                                const std::function<double(double)>& history,
                                const std::function<double(double)>& path) {
  Eigen::MatrixXd h(1, hist + 1);
  for (int i = 0; i <= hist; ++i) h(0, i) = history(i == hist ? 0.0 : -delay + delay * i / hist);
  TrajectoryPiece piece{{IntervalKind::kControl, 0, 0.0, b}, Eigen::MatrixXd(1, steps + 1)};
  for (int i = 0; i <= steps; ++i) piece.values(0, i) = path(piece.time(i));
  return PiecewiseTrajectory(delay, h, {piece});
}

}  // namespace

TEST(TimeMesh, SingleWindowWithoutImpulses) {
  const std::vector<double> points{0.0, 0.4};
  const auto mesh = TimeMesh::FromBreakpoints(points, 0.4);
  EXPECT_EQ(mesh.num_impulses(), 0);
  ASSERT_EQ(mesh.intervals().size(), 1u);
  EXPECT_DOUBLE_EQ(mesh.control_window(0).end, 0.4);
}

TEST(TimeMesh, OneImpulseWindows) {
  const TimeMesh mesh({0.0, 0.3, 1.0}, {0.0, 0.5}, 1.0);
  EXPECT_EQ(mesh.num_impulses(), 1);
  const auto iv = mesh.intervals();
  ASSERT_EQ(iv.size(), 3u);
  EXPECT_EQ(iv[0].kind, IntervalKind::kControl);
  EXPECT_DOUBLE_EQ(iv[0].end, 0.3);
  EXPECT_EQ(iv[1].kind, IntervalKind::kImpulse);
  EXPECT_DOUBLE_EQ(iv[1].start, 0.3);
  EXPECT_DOUBLE_EQ(iv[1].end, 0.5);
  EXPECT_EQ(iv[2].kind, IntervalKind::kControl);
  EXPECT_DOUBLE_EQ(iv[2].start, 0.5);
}

TEST(TimeMesh, RejectsBrokenInterleaving) {
  EXPECT_THROW(TimeMesh({0.0, 0.5, 1.0}, {0.0, 0.4}, 1.0), std::invalid_argument);
  EXPECT_THROW(TimeMesh({0.1, 0.5, 1.0}, {0.1, 0.6}, 1.0), std::invalid_argument);
  EXPECT_THROW(TimeMesh({0.0, 0.5, 0.9}, {0.0, 0.6}, 1.0), std::invalid_argument);
  EXPECT_THROW(TimeMesh({0.0, 1.0}, {0.0}, -1.0), std::invalid_argument);
  const std::vector<double> odd{0.0, 0.3, 0.5};
  EXPECT_THROW(TimeMesh::FromBreakpoints(odd, 0.5), std::invalid_argument);
}

TEST(TimeMesh, RandomMeshesTileTheHorizon) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = trial % 4;
    const double b = oracle::uniform(rng, 0.5, 3.0);
    const auto mesh = oracle::random_mesh(n, b, rng);
    const auto iv = mesh.intervals();
    ASSERT_EQ(static_cast<int>(iv.size()), 2 * n + 1);
    double cursor = 0.0;
    for (const auto& piece : iv) {
      EXPECT_EQ(piece.start, cursor);
      EXPECT_GT(piece.length(), 0.0);
      cursor = piece.end;
    }
    EXPECT_EQ(cursor, b);
  }
}

TEST(HistorySegment, AtZeroEqualsHistory) {
  const auto traj = scalar_path(1.0, 1.0, 10, 8, [](double t) { return std::cos(t); },
                                [](double t) { return 5.0 + t; });
  const auto seg = history_segment(traj, 0.0);
  for (int i = 0; i <= 8; ++i) EXPECT_DOUBLE_EQ(seg.sample(i)(0), traj.history()(0, i));
}

TEST(HistorySegment, ConstantPathGivesConstantSegment) {
  const auto traj = scalar_path(0.7, 1.0, 20, 16, [](double) { return 2.0; },
                                [](double) { return 2.0; });
  for (double t : {0.0, 0.13, 0.5, 1.0}) {
    const auto seg = history_segment(traj, t);
    for (int i = 0; i <= 16; ++i) EXPECT_DOUBLE_EQ(seg.sample(i)(0), 2.0);
  }
}

TEST(HistorySegment, RampAfterZeroHistory) {
  const auto traj = scalar_path(1.0, 1.0, 100, 128, [](double) { return 0.0; },
                                [](double t) { return t; });
  const auto seg = history_segment(traj, 0.5);
  for (int i = 0; i <= 128; ++i) {
    EXPECT_NEAR(seg.sample(i)(0), std::max(0.0, 0.5 + seg.offset(i)), 1e-14);
  }
  EXPECT_THROW(history_segment(traj, 1.5), std::invalid_argument);
  EXPECT_THROW(history_segment(traj, -0.1), std::invalid_argument);
}

TEST(DNorm, ClosedForms) {
  EXPECT_EQ(d_norm(HistorySegment(Eigen::MatrixXd::Zero(2, 9), 1.0)), 0.0);
  Eigen::MatrixXd c(2, 9);
  c.row(0).setConstant(3.0);
  c.row(1).setConstant(4.0);
  EXPECT_NEAR(d_norm(HistorySegment(c, 2.5)), 5.0, 1e-14);
  Eigen::MatrixXd ramp(1, 129);
  for (int i = 0; i <= 128; ++i) ramp(0, i) = -1.0 + i / 128.0;
  EXPECT_NEAR(d_norm(HistorySegment(ramp, 1.0)), 0.5, 1e-14);
}

TEST(DNorm, RefinementIsSecondOrder) {
  auto segment = [](int h) {
    Eigen::MatrixXd s(1, h + 1);
    for (int i = 0; i <= h; ++i) s(0, i) = std::exp(-1.0 + static_cast<double>(i) / h);
    return HistorySegment(s, 1.0);
  };
  const double exact = 1.0 - std::exp(-1.0);
  const double e1 = std::abs(d_norm(segment(32)) - exact);
  const double e2 = std::abs(d_norm(segment(64)) - exact);
  EXPECT_NEAR(e1 / e2, 4.0, 0.05);
}

TEST(PcNorm, Examples) {
  const auto zero = scalar_path(1.0, 1.0, 4, 4, [](double) { return 0.0; },
                                [](double) { return 0.0; });
  EXPECT_EQ(pc_norm(zero), 0.0);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 5);
  TrajectoryPiece a{{IntervalKind::kControl, 0, 0.0, 0.5}, Eigen::MatrixXd::Constant(1, 3, 1.0)};
  TrajectoryPiece b{{IntervalKind::kImpulse, 1, 0.5, 1.0}, Eigen::MatrixXd::Constant(1, 3, 3.0)};
  const PiecewiseTrajectory jump(1.0, h, {a, b});
  EXPECT_EQ(pc_norm(jump), 3.0);
  EXPECT_EQ(jump(0.5)(0), 1.0);
  EXPECT_EQ(jump.right_limit(0.5)(0), 3.0);

  const auto wave = scalar_path(1.0, 1.0, 100, 4, [](double) { return 0.0; },
                                [](double t) { return std::sin(std::numbers::pi * t); });
  EXPECT_NEAR(pc_norm(wave), 1.0, 1e-12);
}

TEST(Norms, HomogeneityAndTriangleOnRandomPaths) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    auto random_path = [&] {
      Eigen::MatrixXd h = oracle::gaussian(2, 9, rng);
      TrajectoryPiece p{{IntervalKind::kControl, 0, 0.0, 1.0}, oracle::gaussian(2, 11, rng)};
      return PiecewiseTrajectory(1.0, h, {p}, StateNorm(0.3));
    };
    const auto x = random_path();
    const auto y = random_path();
    const double c = oracle::uniform(rng, -3.0, 3.0);
    EXPECT_NEAR(pc_norm(x * c), std::abs(c) * pc_norm(x), 1e-12);
    EXPECT_LE(pc_norm(x - y), pc_norm(x) + pc_norm(y * -1.0) + 1e-12);
    const double t = oracle::uniform(rng, 0.0, 1.0);
    const auto sx = history_segment(x, t);
    const auto sy = history_segment(y, t);
    EXPECT_NEAR(d_norm(history_segment(x * c, t)), std::abs(c) * d_norm(sx), 1e-12);
    EXPECT_LE(d_norm(sx - sy), d_norm(sx) + d_norm(sy) + 1e-12);
    EXPECT_GE(d_norm(sx), 0.0);
  }
}

TEST(HistorySegment, OffsetZeroIsLeftLimit) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 9);
  TrajectoryPiece a{{IntervalKind::kControl, 0, 0.0, 0.4}, Eigen::MatrixXd::Constant(1, 5, 1.0)};
  TrajectoryPiece b{{IntervalKind::kImpulse, 1, 0.4, 1.0}, Eigen::MatrixXd::Constant(1, 7, 9.0)};
  const PiecewiseTrajectory traj(1.0, h, {a, b});
  std::mt19937_64 rng(5);
  for (int k = 0; k < 30; ++k) {
    const double t = oracle::uniform(rng, 0.0, 1.0);
    EXPECT_EQ(history_segment(traj, t).sample(8)(0), traj(t)(0));
  }
  EXPECT_EQ(history_segment(traj, 0.4).sample(8)(0), 1.0);
}

TEST(PiecewiseTrajectory, RejectsGapsAndNonFiniteSamples) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 3);
  TrajectoryPiece a{{IntervalKind::kControl, 0, 0.0, 0.4}, Eigen::MatrixXd::Zero(1, 3)};
  TrajectoryPiece gap{{IntervalKind::kControl, 1, 0.5, 1.0}, Eigen::MatrixXd::Zero(1, 3)};
  EXPECT_THROW(PiecewiseTrajectory(1.0, h, {a, gap}), std::invalid_argument);
  TrajectoryPiece bad{{IntervalKind::kControl, 0, 0.0, 1.0}, Eigen::MatrixXd::Zero(1, 3)};
  bad.values(0, 1) = std::nan("");
  EXPECT_THROW(PiecewiseTrajectory(1.0, h, {bad}), std::invalid_argument);
  EXPECT_THROW(PiecewiseTrajectory(0.0, h, {a}), std::invalid_argument);
}
