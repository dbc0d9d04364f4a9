#include <benchmark/benchmark.h>

#include "pqpcp/pqpcp.hpp"

using namespace pqpcp;

static void BM_Svd(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = randn_matrix(n, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(svd(m));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(32, 512)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_WeightedSvt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto y = randn_matrix(n, n, 2);
    const auto w = compute_weights_L(y, 0.5, 1e-3);
    for (auto _ : state) benchmark::DoNotOptimize(prox_weighted_svt(y, w, 2.0));
}
BENCHMARK(BM_WeightedSvt)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_SolverStep(benchmark::State& state) {
    SyntheticSpec spec;
    spec.n = static_cast<std::size_t>(state.range(0));
    const auto problem = generate(spec);
    SolverConfig cfg;
    cfg.warm_start_iters = 0;
    PiraSolver solver(problem.x_observed, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(solver.step());
}
BENCHMARK(BM_SolverStep)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_Solve(benchmark::State& state) {
    SyntheticSpec spec;
    spec.n = static_cast<std::size_t>(state.range(0));
    spec.r = 5;
    const auto problem = generate(spec);
    for (auto _ : state) benchmark::DoNotOptimize(solve(problem.x_observed, SolverConfig{}));
}
BENCHMARK(BM_Solve)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_Generate(benchmark::State& state) {
    SyntheticSpec spec;
    spec.n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(generate(spec));
}
BENCHMARK(BM_Generate)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
