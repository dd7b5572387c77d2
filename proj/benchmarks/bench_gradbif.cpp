#include <benchmark/benchmark.h>

#include "gradbif/bifurcation.hpp"
#include "gradbif/caustic.hpp"
#include "gradbif/flow.hpp"

using namespace gradbif;

namespace {

const Window kFiber = Window::square({0, 0}, 3.0, 128);

void BM_Gradient(benchmark::State& state) {
    const auto f = elliptic_umbilic_slice(1.0);
    Vec2 y{0.3, -0.7};
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.gradient(y));
        y.x += 1e-9;
    }
}
BENCHMARK(BM_Gradient);

void BM_Caustic(benchmark::State& state) {
    const auto f = elliptic_umbilic_slice(1.0);
    const Window w = Window::square({0, 0}, 2.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_caustic(f, w));
}
BENCHMARK(BM_Caustic)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CriticalPoints(benchmark::State& state) {
    const auto f = elliptic_umbilic_slice(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_critical_points(f, {-0.25, 0.0}, kFiber));
}
BENCHMARK(BM_CriticalPoints)->Unit(benchmark::kMicrosecond);

void BM_Portrait(benchmark::State& state) {
    const auto f = elliptic_umbilic_slice(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(portrait(f, {-0.25, 0.0}, kFiber));
}
BENCHMARK(BM_Portrait)->Unit(benchmark::kMillisecond);

void BM_Diagram(benchmark::State& state) {
    const auto f = elliptic_umbilic_slice(1.0);
    DiagramOptions o;
    const int n = static_cast<int>(state.range(0));
    o.base = Window{{-0.5, 0.0}, 1.25, 1.25, n, n};
    o.fiber = kFiber;
    for (auto _ : state) benchmark::DoNotOptimize(assemble_diagram(f, o));
}
BENCHMARK(BM_Diagram)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
