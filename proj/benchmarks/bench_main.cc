#include <random>

#include <benchmark/benchmark.h>

#include "totalctl/gramian.h"
#include "totalctl/mild_solver.h"
#include "totalctl/semigroup.h"
#include "totalctl/transport_example.h"

using namespace totalctl;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng) / std::sqrt(rows);
  return m;
}

void BM_MatrixExponential(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MatrixExponentialSemigroup op(random_matrix(n, n, 1), 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(op.matrix(0.37));
}
BENCHMARK(BM_MatrixExponential)->Arg(8)->Arg(32)->Arg(64);

void BM_DenseGramian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MatrixExponentialSemigroup op(random_matrix(n, n, 2), 10.0);
  const Eigen::MatrixXd b = random_matrix(n, n, 3);
  const PropagatorTable table(op, 1e-3, 500);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_gramian(table, b, 0).min_eig);
}
BENCHMARK(BM_DenseGramian)->Arg(4)->Arg(16);

void BM_ShiftGramian(benchmark::State& state) {
  const ShiftSemigroup op(static_cast<int>(state.range(0)));
  const PropagatorTable table(op, 1e-3, 500);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(op.dim(), op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(assemble_gramian(table, b, 0).min_eig);
}
BENCHMARK(BM_ShiftGramian)->Arg(32)->Arg(64);

void BM_PicardSweep(benchmark::State& state) {
  TransportConfig cfg;
  cfg.nodes = static_cast<int>(state.range(0));
  NumericsConfig numerics;
  numerics.time_step = 1e-3;
  const Discretization disc(build_case1(cfg), numerics);
  const auto targets = transport_targets(cfg);
  const auto start = initial_iterate(disc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_operator(disc, start, targets).residuals.size());
  }
}
BENCHMARK(BM_PicardSweep)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
