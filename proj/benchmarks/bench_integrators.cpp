#include <benchmark/benchmark.h>

#include "polystab/integrators.hpp"
#include "polystab/sde_model.hpp"

static void BM_EmStep(benchmark::State& state) {
    const auto problem = polystab::cubic_counterexample();
    polystab::EmStepper stepper(problem);
    std::vector<double> y{0.5};
    std::int64_t k = 0;
    for (auto _ : state) {
        stepper.step(y, {.k = k++, .dt = 0.01, .dB = 0.0});
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_EmStep);

static void BM_BemStep(benchmark::State& state) {
    const auto problem = polystab::bem_example();
    polystab::ImplicitSolverConfig cfg;
    cfg.method = state.range(0) == 0 ? polystab::SolverMethod::newton : polystab::SolverMethod::bisection;
    polystab::BemStepper stepper(problem, cfg);
    std::vector<double> z{2.0};
    for (auto _ : state) {
        z[0] = 2.0;
        benchmark::DoNotOptimize(stepper.step(z, {.k = 0, .dt = 0.3, .dB = 0.1}));
    }
    state.SetLabel(state.range(0) == 0 ? "newton" : "bisection");
}
BENCHMARK(BM_BemStep)->Arg(0)->Arg(1);
