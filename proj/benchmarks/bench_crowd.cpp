#include <benchmark/benchmark.h>

#include <vector>

#include "cbc/dynsys.hpp"
#include "cbc/pedsim.hpp"

using namespace cbc;

namespace {

ped::CrowdSystem make_crowd(int n) {
    ped::PedParams p;
    p.n_ped = n;
    return ped::CrowdSystem(p, ped::FluxParams{}, ped::InputBox{}, 7, 0.1, 0.0);
}

}  // namespace

static void BM_Accelerations(benchmark::State& state) {
    auto crowd = make_crowd(static_cast<int>(state.range(0)));
    const State x = crowd.initial_state();
    std::vector<double> acc(2 * crowd.params().n_ped);
    for (auto _ : state) {
        ped::accelerations(x, 0.0, 0.02, crowd.params(), crowd.box(), acc);
        benchmark::DoNotOptimize(acc.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Accelerations)->RangeMultiplier(2)->Range(25, 400)->Complexity(benchmark::oNSquared);

static void BM_CrowdRk4Step(benchmark::State& state) {
    auto crowd = make_crowd(100);
    State x = crowd.initial_state();
    for (auto _ : state) {
        x = rk4_step(crowd, x, 0.0, 0.0, 0.1);
        crowd.post_step(x, 0.0);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_CrowdRk4Step);

static void BM_FluxPhi(benchmark::State& state) {
    auto crowd = make_crowd(100);
    const State x = crowd.initial_state();
    for (auto _ : state) benchmark::DoNotOptimize(ped::flux_phi(x, crowd.flux()));
}
BENCHMARK(BM_FluxPhi);
