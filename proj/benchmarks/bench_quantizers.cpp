// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "upaq/codebooks.hpp"
#include "upaq/narrowband.hpp"
#include "upaq/wideband.hpp"

using namespace upaq;

namespace {

UpaGeometry square(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    return {m, m, 0.5, 0.5};
}

void BM_CoarseSearch(benchmark::State& state) {
    const UpaGeometry g = square(state);
    const CVector h = narrowband_channel(g, sample_paths(4, 1));
    for (auto _ : state) benchmark::DoNotOptimize(coarse_search(h, g, 5));
}
BENCHMARK(BM_CoarseSearch)->Arg(4)->Arg(8)->Arg(16);

void BM_ProposedQuantize(benchmark::State& state) {
    const UpaGeometry g = square(state);
    const ProposedQuantizer q(g, {5, 5, 4, 2});
    const CVector h = narrowband_channel(g, sample_paths(4, 2));
    for (auto _ : state) benchmark::DoNotOptimize(q.quantize(h));
}
BENCHMARK(BM_ProposedQuantize)->Arg(4)->Arg(8)->Arg(16);

void BM_KpBaseline(benchmark::State& state) {
    const UpaGeometry g = square(state);
    const CVector h = narrowband_channel(g, sample_paths(4, 3));
    for (auto _ : state) benchmark::DoNotOptimize(kp_baseline(h, g, 22));
}
BENCHMARK(BM_KpBaseline)->Arg(4)->Arg(8)->Arg(16);

void BM_BeamQuantize(benchmark::State& state) {
    const UpaGeometry g{8, 8, 0.5, 0.5};
    const int n = static_cast<int>(state.range(0));
    const CVector h = narrowband_channel(g, sample_paths(5, 4));
    const std::vector<int> bits(static_cast<std::size_t>(n), 4);
    for (auto _ : state) benchmark::DoNotOptimize(beam_quantize(h, g, n, bits));
}
BENCHMARK(BM_BeamQuantize)->Arg(1)->Arg(2)->Arg(3);

void BM_CombinerCodebook(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int bits = static_cast<int>(state.range(1));
    const CMatrix r = analytic_covariance({8, 8, 0.5, 0.5}, n, std::vector<int>(static_cast<std::size_t>(n), 4), 4);
    for (auto _ : state) benchmark::DoNotOptimize(combiner_codebook(r, n, bits));
}
BENCHMARK(BM_CombinerCodebook)->Args({2, 2})->Args({2, 4})->Args({3, 4})->Unit(benchmark::kMicrosecond);

void BM_WidebandQuantize(benchmark::State& state) {
    const UpaGeometry g = square(state);
    const WidebandGrid grid{600, 15e3, 2e9, 4, 2};
    const WidebandQuantizer q(g, grid, WidebandConfig{});
    const CMatrix h = wideband_channel(g, sample_paths(4, 5), grid);
    for (auto _ : state) benchmark::DoNotOptimize(q.quantize(h));
}
BENCHMARK(BM_WidebandQuantize)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
