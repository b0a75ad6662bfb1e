#include <benchmark/benchmark.h>

#include "cbc/continuation.hpp"
#include "cbc/controllability.hpp"
#include "cbc/normalforms.hpp"

using namespace cbc;

static void BM_CheckAll(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Matrix A(n, n), b(n, 1), m(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, i) = -1.0 - static_cast<double>(i);
        if (i + 1 < n) A(i, i + 1) = 0.5;
        b(i, 0) = 1.0 / static_cast<double>(i + 1);
        m(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
    }
    const Linearization lin{A, m, b};
    for (auto _ : state) benchmark::DoNotOptimize(check_all(lin));
}
BENCHMARK(BM_CheckAll)->DenseRange(2, 8, 2);

static void BM_FoldZieBranch(benchmark::State& state) {
    ContinuationOptions co;
    co.mu_min = -1.0;
    co.mu_max = 1.0;
    co.run.tol_std = 1e-6;
    co.run.tol_std_mu = 1e-6;
    co.run.max_time = 1000;
    ZieOptions zo;
    zo.sigma = 1;
    for (auto _ : state) {
        FoldSystem fold(1.0);
        const Branch br = cbc_zie_branch(fold, {State{1.0}, {{1.0, 1.0}}, {-1.0, -0.5}}, co, zo);
        benchmark::DoNotOptimize(br.points.size());
    }
}
BENCHMARK(BM_FoldZieBranch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
