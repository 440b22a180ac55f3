// Serial direct-summation kernels against the FFT/OpenMP ones.

#include <benchmark/benchmark.h>

#include "rsm/forward_model.hpp"
#include "rsm/reference.hpp"
#include "rsm/rng.hpp"

using namespace rsm;

namespace {

Matrix random(std::size_t m, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix out(m, n);
    for (auto& v : out.data()) v = rng.uniform();
    return out;
}

void BM_ForwardDirect(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix d = random(75, n, 1);
    const Matrix a = random(75, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(reference::forward_direct(d, a));
}

void BM_ForwardFft(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ResponseMatrix d(random(75, n, 1));
    const SpectralPlan plan = build_spectral_plan(d, 1.0);
    const Matrix a = random(75, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(apply_forward(plan, a));
}

void BM_AdjointDirect(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix d = random(75, n, 1);
    const Signal y = Signal::from_matrix(random(1, n, 3));
    for (auto _ : state) benchmark::DoNotOptimize(reference::adjoint_direct(d, y));
}

void BM_AdjointFft(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ResponseMatrix d(random(75, n, 1));
    const SpectralPlan plan = build_spectral_plan(d, 1.0);
    const Signal y = Signal::from_matrix(random(1, n, 3));
    for (auto _ : state) benchmark::DoNotOptimize(apply_adjoint(plan, y));
}

void BM_RegularizedSolve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ResponseMatrix d(random(75, n, 1));
    const SpectralPlan plan = build_spectral_plan(d, 0.5);
    const Matrix x = random(75, n, 4);
    for (auto _ : state) benchmark::DoNotOptimize(solve_regularized_normal(plan, d, x));
}

}  // namespace

BENCHMARK(BM_ForwardDirect)->Arg(180)->Arg(512);
BENCHMARK(BM_ForwardFft)->Arg(180)->Arg(512)->Arg(1024);
BENCHMARK(BM_AdjointDirect)->Arg(180)->Arg(512);
BENCHMARK(BM_AdjointFft)->Arg(180)->Arg(512)->Arg(1024);
BENCHMARK(BM_RegularizedSolve)->Arg(180)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
