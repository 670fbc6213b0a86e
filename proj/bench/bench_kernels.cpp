// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "pinph/estimator.hpp"
#include "pinph/kernels.hpp"
#include "pinph/simulator.hpp"

using namespace pinph;

namespace {

EstimationWindow bench_window(int n_days) {
    SimulationSpec spec;
    spec.params = {0.4, 0.5, 300.0, 400.0, 500.0, 50.0, 50.0};
    spec.n_days = n_days;
    spec.seed = 1;
    return simulate_window(spec);
}

void BM_EvaluateSerial(benchmark::State& state) {
    const auto w = bench_window(static_cast<int>(state.range(0)));
    const PreparedWindow prepared(w.days);
    const auto cands = draw_candidates(compute_bounds(w), 10000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_candidates_serial(prepared, cands));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cands.size()));
}

void BM_EvaluateParallel(benchmark::State& state) {
    const auto w = bench_window(static_cast<int>(state.range(0)));
    const PreparedWindow prepared(w.days);
    const auto cands = draw_candidates(compute_bounds(w), 10000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_candidates(prepared, cands));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cands.size()));
}

void BM_RefineSerial(benchmark::State& state) {
    const auto w = bench_window(static_cast<int>(state.range(0)));
    const auto bounds = compute_bounds(w);
    const auto starts = draw_candidates(bounds, 16, 3);
    const EstimatorConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(refine_starts_serial(w, starts, bounds, config));
}

void BM_RefineParallel(benchmark::State& state) {
    const auto w = bench_window(static_cast<int>(state.range(0)));
    const auto bounds = compute_bounds(w);
    const auto starts = draw_candidates(bounds, 16, 3);
    const EstimatorConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(refine_starts(w, starts, bounds, config));
}

}  // namespace

BENCHMARK(BM_EvaluateSerial)->Arg(63)->Arg(252)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Arg(63)->Arg(252)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RefineSerial)->Arg(63)->Arg(252)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RefineParallel)->Arg(63)->Arg(252)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
