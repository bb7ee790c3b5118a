#include <benchmark/benchmark.h>

#include "polystab/mc_harness.hpp"
#include "polystab/sde_model.hpp"

static void BM_LinearEnsemble(benchmark::State& state) {
    const auto problem = polystab::linear_example();
    polystab::SimConfig cfg;
    cfg.num_paths = state.range(0);
    cfg.num_steps = 1000;
    cfg.seed = 1;
    cfg.initial_value = {1.0};
    for (auto _ : state) {
        auto series = polystab::simulate_ensemble(problem, cfg, {.workers = 1});
        benchmark::DoNotOptimize(series.points.data());
    }
    state.SetItemsProcessed(state.iterations() * cfg.num_paths * cfg.num_steps);
}
BENCHMARK(BM_LinearEnsemble)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_BemEnsemble(benchmark::State& state) {
    const auto problem = polystab::bem_example();
    polystab::SimConfig cfg;
    cfg.scheme = polystab::Scheme::bem;
    cfg.dt = 0.3;
    cfg.num_paths = 256;
    cfg.num_steps = 1000;
    cfg.seed = 1;
    cfg.initial_value = {1.0};
    for (auto _ : state) {
        auto series = polystab::simulate_ensemble(problem, cfg, {.workers = 1});
        benchmark::DoNotOptimize(series.points.data());
    }
    state.SetItemsProcessed(state.iterations() * cfg.num_paths * cfg.num_steps);
}
BENCHMARK(BM_BemEnsemble)->Unit(benchmark::kMillisecond);
