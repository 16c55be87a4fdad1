#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "harness/config.h"
#include "harness/csv_io.h"
#include "harness/run.h"

using namespace totalctl;
using namespace totalctl::harness;
namespace fs = std::filesystem;

namespace {

const char* kSmallCase1 = R"([problem]
example = transport-case1
nodes = 16
[numerics]
time_step = 0.01
history_grid = 32
)";

const char* kLinear = R"([problem]
example = linear
generator = 0 1; -1 0
control = 1 0; 0 1
initial = 1 0
[mesh]
breakpoints = 0 0.3 0.5 1
horizon = 1
[numerics]
time_step = 0.01
)";

class ScratchDir : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("totalctl_test_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunOptions options(const std::string& sub = "") const {
    RunOptions o;
    o.timing = false;
    o.out_dir = (dir_ / sub).string();
    return o;
  }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return "";
}

}  // namespace

TEST(Config, ParsesEverySection) {
  const auto cfg = parse_config(R"(
[problem]
example = transport-case2
nodes = 32
delay = 2
saturation = 0.5
seed = 7
[mesh]
breakpoints = 0 0.2 0.4 0.8 0.9 1.5
horizon = 1.5
[numerics]
time_step = 0.005
tol = 1e-10
max_iter = 50
jobs = 2
window_ridge = 0 0.1 0
[outputs]
directory = results
prefix = case2
)");
  EXPECT_EQ(cfg.example, "transport-case2");
  EXPECT_EQ(cfg.transport.nodes, 32);
  EXPECT_EQ(cfg.transport.delay, 2.0);
  EXPECT_EQ(cfg.transport.saturation, 0.5);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.mesh.num_impulses(), 2);
  EXPECT_EQ(cfg.mesh.lambda()[2], 0.9);
  EXPECT_EQ(cfg.numerics.time_step, 0.005);
  EXPECT_EQ(cfg.numerics.max_iter, 50);
  EXPECT_EQ(cfg.numerics.jobs, 2);
  EXPECT_EQ(cfg.numerics.window_ridge, (std::vector<double>{0, 0.1, 0}));
  EXPECT_EQ(cfg.output_dir, "results");
  EXPECT_EQ(cfg.prefix, "case2");
  ASSERT_FALSE(cfg.echo.empty());
  EXPECT_EQ(cfg.echo.front().key, "example");
}

TEST(Config, RejectsBadInput) {
  EXPECT_NE(expect_config_error("[problem]\ndelay = -1\n").find("problem.delay"), std::string::npos);
  EXPECT_NE(expect_config_error("[numerics]\ntol = abc\n").find("numerics.tol"), std::string::npos);
  EXPECT_NE(expect_config_error("[problem]\ncolour = red\n").find("colour"), std::string::npos);
  expect_config_error("[mesh]\nbreakpoints = 0 0.5 0.4 1\n");
  expect_config_error("[weather]\nsun = 1\n");
  expect_config_error("loose = 1\n");
  expect_config_error("[problem]\nexample = heat\n");
  expect_config_error("[numerics]\nmax_iter = 0\n");
}

TEST(Config, ParsesMatricesAndLists) {
  const Eigen::MatrixXd m = parse_matrix("1 2; 3 4", "m");
  EXPECT_EQ(m, (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished());
  EXPECT_THROW(parse_matrix("1 2; 3", "m"), ConfigError);
  EXPECT_EQ(parse_list(" 1  2.5\t3 ", "l"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_THROW(parse_list("1 x", "l"), ConfigError);
}

TEST(Config, BuildsTheLinearPreset) {
  const auto built = build_problem(parse_config(kLinear));
  EXPECT_EQ(built.problem.dim(), 2);
  EXPECT_EQ(built.targets.size(), 2u);
  EXPECT_GE(built.problem.constants.semigroup_bound, 1.0);
  EXPECT_TRUE(built.problem.is_linear());
}

TEST_F(ScratchDir, CsvFormatContract) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 3);
  TrajectoryPiece a{{IntervalKind::kControl, 0, 0.0, 0.5}, (Eigen::MatrixXd(1, 3) << 0, 1, 2).finished()};
  TrajectoryPiece b{{IntervalKind::kImpulse, 1, 0.5, 1.0}, (Eigen::MatrixXd(1, 2) << 7, 7).finished()};
  const PiecewiseTrajectory one(1.0, h, {a});
  const auto path = (dir_ / "one.csv").string();
  write_trajectory_csv(path, one, nullptr, false);
  const auto table = read_trajectory_csv(path);
  EXPECT_EQ(table.time.size(), 3u);
  EXPECT_EQ(table.header, (std::vector<std::string>{"t", "window_kind", "side", "x0"}));

  const PiecewiseTrajectory jump(1.0, h, {a, b});
  write_trajectory_csv(path, jump, nullptr, false);
  const auto jt = read_trajectory_csv(path);
  int at_break = 0;
  for (std::size_t r = 0; r < jt.time.size(); ++r) {
    if (jt.time[r] == 0.5) {
      ++at_break;
      EXPECT_EQ(jt.side[r], jt.kind[r] == "control" ? "L" : "R");
    }
  }
  EXPECT_EQ(at_break, 2);
}

TEST_F(ScratchDir, CsvRoundTripKeepsTheNorm) {
  auto cfg = parse_config(kSmallCase1);
  const auto built = build_problem(cfg);
  const Discretization disc(built.problem, cfg.numerics);
  const auto report = picard_solve(disc, built.targets);
  const auto path = (dir_ / "traj.csv").string();
  write_trajectory_csv(path, report.trajectory, &report.control);
  const auto table = read_trajectory_csv(path);
  EXPECT_NEAR(csv_pc_norm(table, disc.problem().norm()), pc_norm(report.trajectory), 1e-12);
  EXPECT_EQ(table.controls.rows(), 16);
}

TEST_F(ScratchDir, ExitCodesUnderFaultInjection) {
  EXPECT_EQ(run_command(Command::kSolve, parse_config(kSmallCase1), options()).code, kExitOk);
  EXPECT_EQ(run_command(Command::kCertify, parse_config(kSmallCase1), options()).code, kExitOk);
  EXPECT_EQ(run_command(Command::kOracle, parse_config(kLinear), options()).code, kExitOk);
  EXPECT_EQ(run_command(Command::kOracle, parse_config(kSmallCase1), options()).code, kExitConfig);

  auto singular = parse_config(std::string(kLinear) + "");
  singular.linear.control = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_EQ(run_command(Command::kSolve, singular, options()).code, kExitNotInvertible);
  EXPECT_EQ(run_command(Command::kCertify, singular, options()).code, kExitNotInvertible);

  auto budget = parse_config(kSmallCase1);
  budget.numerics.max_iter = 1;
  const auto starved = run_command(Command::kSolve, budget, options());
  EXPECT_EQ(starved.code, kExitNonConvergence);
  EXPECT_FALSE(starved.report["solve"]["converged"].get<bool>());

  auto ridged = parse_config(kLinear);
  ridged.numerics.window_ridge = {0.0, 10.0};
  const auto missed = run_command(Command::kSolve, ridged, options());
  EXPECT_EQ(missed.code, kExitTargetsMissed);
  EXPECT_EQ(missed.report["verdict"]["first_miss"].get<int>(), 1);

  const fs::path bad = dir_ / "bad.ini";
  std::ofstream(bad) << "[problem]\ndelay = -1\n";
  std::ostringstream out, err;
  EXPECT_EQ(run_file(Command::kSolve, bad.string(), options(), out, err), kExitConfig);
  EXPECT_NE(err.str().find("problem.delay"), std::string::npos);
  EXPECT_EQ(run_file(Command::kSolve, (dir_ / "missing.ini").string(), options(), out, err),
            kExitConfig);
}

TEST_F(ScratchDir, ReportsAreByteIdenticalWithoutTimings) {
  const auto a = run_command(Command::kSolve, parse_config(kSmallCase1), options("a"));
  const auto b = run_command(Command::kSolve, parse_config(kSmallCase1), options("b"));
  ASSERT_EQ(a.code, kExitOk);
  EXPECT_EQ(slurp(dir_ / "a" / "run_report.json"), slurp(dir_ / "b" / "run_report.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "run_trajectory.csv"), slurp(dir_ / "b" / "run_trajectory.csv"));
  EXPECT_FALSE(a.report.contains("timings"));
  RunOptions timed = options("c");
  timed.timing = true;
  EXPECT_TRUE(run_command(Command::kSolve, parse_config(kSmallCase1), timed).report.contains("timings"));
}

TEST_F(ScratchDir, ReportCarriesTheCertificateAndVerdict) {
  const auto result = run_command(Command::kSolve, parse_config(kSmallCase1), options());
  const auto& r = result.report;
  for (const char* key : {"tool", "command", "seed", "config", "problem", "targets", "gramians",
                          "certificate", "assumption_check", "solve", "verdict", "outputs", "status"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
  EXPECT_TRUE(r["verdict"]["totally_controllable"].get<bool>());
  EXPECT_EQ(r["certificate"]["gamma"].get<double>(), 1.0);
  EXPECT_EQ(r["config"]["problem"]["nodes"].get<std::string>(), "16");
}

TEST_F(ScratchDir, OutputDirectoryPrecedence) {
  auto cfg = parse_config(kSmallCase1);
  cfg.output_dir = (dir_ / "from_config").string();
  RunOptions none;
  ::setenv("TOTALCTL_OUT_DIR", (dir_ / "from_env").c_str(), 1);
  EXPECT_EQ(resolve_output_dir(cfg, none), (dir_ / "from_env").string());
  RunOptions flag;
  flag.out_dir = (dir_ / "from_flag").string();
  EXPECT_EQ(resolve_output_dir(cfg, flag), (dir_ / "from_flag").string());
  ::unsetenv("TOTALCTL_OUT_DIR");
  EXPECT_EQ(resolve_output_dir(cfg, none), cfg.output_dir);
}
