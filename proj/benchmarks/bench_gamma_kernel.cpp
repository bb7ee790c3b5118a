#include <benchmark/benchmark.h>

#include <cmath>

#include "polystab/gamma_kernel.hpp"

static void BM_LogGamma(benchmark::State& state) {
    const double x = static_cast<double>(state.range(0)) + 0.37;
    for (auto _ : state) benchmark::DoNotOptimize(polystab::log_gamma(x));
}
BENCHMARK(BM_LogGamma)->Arg(0)->Arg(1)->Arg(5)->Arg(50)->Arg(5000);

static void BM_StdLgamma(benchmark::State& state) {
    const double x = static_cast<double>(state.range(0)) + 0.37;
    for (auto _ : state) benchmark::DoNotOptimize(std::lgamma(x));
}
BENCHMARK(BM_StdLgamma)->Arg(0)->Arg(1)->Arg(5)->Arg(50)->Arg(5000);

static polystab::GammaProductParams product_params(std::int64_t b) {
    return {.a = 2, .b = b, .alpha = 3.0, .beta = 0.5, .delta = 0.1};
}

static void BM_ProductViaGamma(benchmark::State& state) {
    const auto p = product_params(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(polystab::product_via_gamma(p));
}
BENCHMARK(BM_ProductViaGamma)->RangeMultiplier(10)->Range(10, 100000);

static void BM_ProductDirect(benchmark::State& state) {
    const auto p = product_params(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(polystab::product_direct(p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProductDirect)->RangeMultiplier(10)->Range(10, 100000)->Complexity(benchmark::oN);
