#include "pnsim/noise.hpp"
#include "pnsim/quantum.hpp"
#include "pnsim/spectral.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace pnsim;

NoiseModelParams bench_params(std::size_t n) {
    NoiseModelParams p;
    p.h0 = 0.01;
    p.leak = 1e-4;
    p.sample_rate = 1e7;
    p.n_samples = n;
    return p;
}

void BM_SynthesizeUnshaped(benchmark::State& state) {
    const auto p = bench_params(static_cast<std::size_t>(state.range(0)));
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_base_trace(p, seed++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizeUnshaped)->Arg(1 << 14)->Arg(1 << 16)->Arg(1 << 18);

void BM_SynthesizeShaped(benchmark::State& state) {
    const auto p = bench_params(static_cast<std::size_t>(state.range(0)));
    const auto shape = ServoShape::defaults(2e5);
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize(p, shape, seed++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizeShaped)->Arg(1 << 14)->Arg(1 << 16)->Arg(1 << 18);

void BM_WelchPsd(benchmark::State& state) {
    const auto trace = generate_base_trace(bench_params(1 << 16), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            estimate_psd(trace, static_cast<std::size_t>(state.range(0)), 0.5));
}
BENCHMARK(BM_WelchPsd)->Arg(1 << 10)->Arg(1 << 13);

void BM_RabiPsd(benchmark::State& state) {
    const auto trace = generate_base_trace(bench_params(1 << 16), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_rabi_psd(trace, 1e5, 5e3, 1 << 13));
}
BENCHMARK(BM_RabiPsd);

void BM_PropagateCarrier(benchmark::State& state) {
    DriveSpec spec;
    spec.kind = DriveKind::Carrier;
    spec.rabi_hz = 1e5;
    const auto trace = generate_base_trace(bench_params(1 << 14), 5);
    const auto psi0 = initial_state(spec);
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate(psi0, spec, trace, 1e-3, {}, {}));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_PropagateCarrier);

void BM_PropagateMsGate(benchmark::State& state) {
    DriveSpec spec;
    spec.kind = DriveKind::MolmerSorensen;
    spec.rabi_hz = 2e4;
    spec.trap_hz = 2e5;
    spec.lamb_dicke = 0.15;
    spec.fock_cutoff = static_cast<int>(state.range(0));
    spec.n_qubits = 2;
    spec.detuning_hz = 2.0 * spec.lamb_dicke * spec.rabi_hz;

    auto p = bench_params(4096);
    p.sample_rate = 5e6;
    const auto trace = generate_base_trace(p, 5);
    const auto psi0 = initial_state(spec);
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate(psi0, spec, trace, 5e-4, {}, {}));
    state.SetItemsProcessed(state.iterations() * 2500);
}
BENCHMARK(BM_PropagateMsGate)->Arg(8)->Arg(15);

} // namespace

BENCHMARK_MAIN();
