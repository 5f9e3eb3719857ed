// Serial versus OpenMP kernels, plus one full apply_F sweep per backend.
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "lvfb/kernels.hpp"
#include "lvfb/semiwave.hpp"

namespace {

using namespace lvfb;

std::vector<double> ramp(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::tanh(1e-3 * static_cast<double>(i));
    return v;
}

template <auto Scan>
void BM_forward_scan(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const std::vector<double> H = ramp(n);
    std::vector<double> y(n);
    const auto w = kernels::exp_segment_weights(-1.3, 0.01);
    for (auto _ : st) {
        Scan(H, w, 0.0, y);
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

template <auto Lerp>
void BM_lerp(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const std::vector<double> f = ramp(n);
    std::vector<double> q(n), out(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = 0.37 * static_cast<double>(i);
    for (auto _ : st) {
        Lerp(0.0, 0.5, f, q, 1.0, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

void BM_apply_F(benchmark::State& st) {
    const auto p = CompetitionParams::make(1.0, 1.0, 0.5, 0.5);
    SemiWaveConfig cfg;
    cfg.n = static_cast<int>(st.range(1));
    const IterationState s0 = initial_iteration_state(p, cfg, default_semiwave_extent(p, 0.5));
    const auto backend = st.range(0) == 0 ? kernels::Backend::Serial : kernels::Backend::Parallel;
    for (auto _ : st) {
        IterationState s1 = apply_F(s0, p, 0.5, backend);
        benchmark::DoNotOptimize(s1.phi_tilde.data());
    }
}

}  // namespace

BENCHMARK(BM_forward_scan<kernels::serial::forward_exp_scan>)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_forward_scan<kernels::omp::forward_exp_scan>)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_lerp<kernels::serial::lerp_uniform>)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_lerp<kernels::omp::lerp_uniform>)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_apply_F)->ArgNames({"parallel", "n"})->Args({0, 4001})->Args({1, 4001})->Args({0, 16001})->Args({1, 16001});

BENCHMARK_MAIN();
