#include <benchmark/benchmark.h>

#include <random>

#include "monoreg/posterior.hpp"
#include "monoreg/projection.hpp"
#include "monoreg/simbench.hpp"

using namespace monoreg;

namespace {

StepFunction noisy_plane(std::size_t d, std::size_t J, std::uint64_t seed) {
    const GridSpec g(d, J);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 0.1);
    std::vector<double> theta(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        double s = 0.0;
        for (auto c : from_offset(j, g).coords) {
            s += static_cast<double>(c) / static_cast<double>(J);
        }
        theta[j] = s + z(rng);
    }
    return StepFunction(g, theta);
}

void BM_ProjectL1(benchmark::State& state) {
    const auto f = noisy_plane(2, static_cast<std::size_t>(state.range(0)), 1);
    const auto w = WeightVector::uniform(f.grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_l1(f, w));
    }
}
BENCHMARK(BM_ProjectL1)->Arg(4)->Arg(7)->Arg(13)->Arg(17)->Unit(benchmark::kMicrosecond);

void BM_ProjectL2(benchmark::State& state) {
    const auto f = noisy_plane(2, static_cast<std::size_t>(state.range(0)), 2);
    const auto w = WeightVector::uniform(f.grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_l2(f, w));
    }
}
BENCHMARK(BM_ProjectL2)->Arg(4)->Arg(7)->Arg(13)->Arg(17)->Unit(benchmark::kMicrosecond);

void BM_ProjectL2Chain(benchmark::State& state) {
    const auto f = noisy_plane(1, static_cast<std::size_t>(state.range(0)), 3);
    const auto w = WeightVector::uniform(f.grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_l2(f, w));
    }
}
BENCHMARK(BM_ProjectL2Chain)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Bin(benchmark::State& state) {
    const auto data = generate({FunctionId::f1, static_cast<std::size_t>(state.range(0)), 0.1, 4});
    const GridSpec g(2, 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bin(data, g));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bin)->Arg(500)->Arg(100000);

void BM_SampleUnrestricted(benchmark::State& state) {
    const auto data = generate({FunctionId::f1, 500, 0.1, 5});
    const auto stats = bin(data, GridSpec(2, 13));
    const auto params = posterior_params(stats, PriorConfig{});
    const auto mode = resolve_sigma(SigmaMode::plug_in(), stats, PriorConfig{});
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_unrestricted(params, mode, std::nullopt, 6, 1000));
    }
}
BENCHMARK(BM_SampleUnrestricted)->Unit(benchmark::kMillisecond);

void BM_BpEstimate(benchmark::State& state) {
    const auto data = generate({FunctionId::f1, static_cast<std::size_t>(state.range(0)), 0.1, 7});
    EstimateConfig cfg;
    cfg.m_draws = 200;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bp_estimate(data, PriorConfig{}, cfg, 8));
    }
}
BENCHMARK(BM_BpEstimate)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
