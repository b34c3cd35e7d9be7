#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gridfault/correlation.hpp"
#include "gridfault/default_case.hpp"
#include "gridfault/gnn.hpp"
#include "gridfault/network.hpp"
#include "gridfault/simulator.hpp"

using namespace gridfault;

namespace {

const GridCase& grid() {
  static const GridCase g = ne39_case();
  return g;
}

const Adjacency& adj() {
  static const Adjacency a = build_adjacency(grid());
  return a;
}

FeatureMatrix random_input(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  FeatureMatrix x(39, kFeatureCount);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

std::vector<int> widths_for(int variant) { return default_ablation_variants()[static_cast<std::size_t>(variant)].widths; }

}  // namespace

static void BM_PowerFlow(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve_power_flow(grid()));
}
BENCHMARK(BM_PowerFlow)->Unit(benchmark::kMicrosecond);

static void BM_SimulateScenario(benchmark::State& state) {
  const auto op = solve_power_flow(grid());
  FaultSpec f;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_scenario(grid(), op, f));
}
BENCHMARK(BM_SimulateScenario)->Unit(benchmark::kMillisecond);

// Arg: ablation variant index (0 = A, 1 = B, 2 = C).
static void BM_Forward(benchmark::State& state) {
  const auto m = init_model(widths_for(static_cast<int>(state.range(0))), adj(), 7);
  const auto x = random_input(1);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x).logit);
}
BENCHMARK(BM_Forward)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

static void BM_Backward(benchmark::State& state) {
  const auto m = init_model(widths_for(static_cast<int>(state.range(0))), adj(), 7);
  std::vector<Example> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({random_input(static_cast<std::uint64_t>(i)), double(i % 2)});
  for (auto _ : state) benchmark::DoNotOptimize(backward(m, batch).loss);
}
BENCHMARK(BM_Backward)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

static void BM_RankRows(benchmark::State& state) {
  const Eigen::MatrixXd rows = random_input(3);
  for (auto _ : state) benchmark::DoNotOptimize(rank_rows(rows, 15, 10, "layer", 2));
}
BENCHMARK(BM_RankRows)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
