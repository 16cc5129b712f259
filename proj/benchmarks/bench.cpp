#include <benchmark/benchmark.h>

#include <ccgeo/calibration.hpp>
#include <ccgeo/distance.hpp>
#include <ccgeo/quasicalib.hpp>

using namespace ccgeo;

namespace {

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

void BM_Hamiltonian(benchmark::State& state) {
    auto S = builtin("heisenberg");
    CotangentState st{vec3(0.3, -0.2, 0.1), vec3(0.7, 0.1, 0.4)};
    for (auto _ : state) benchmark::DoNotOptimize(hamiltonian(S, st));
}
BENCHMARK(BM_Hamiltonian);

void BM_Rk4HamiltonianStep(benchmark::State& state) {
    auto S = builtin("heisenberg");
    CotangentState st{vec3(0.3, -0.2, 0.1), vec3(0.7, 0.1, 0.4)};
    for (auto _ : state) benchmark::DoNotOptimize(rk4_hamiltonian_step(S, st, 1e-3));
}
BENCHMARK(BM_Rk4HamiltonianStep);

void BM_IntegrateExtremal(benchmark::State& state) {
    auto S = builtin("heisenberg");
    CotangentState st{Vec::Zero(3), vec3(0, 1, 0.5)};
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate_extremal(S, st, 1.0, state.range(0)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_IntegrateExtremal)->Arg(100)->Arg(1000)->Complexity(benchmark::oN);

void BM_MinimalNormPreimage(benchmark::State& state) {
    auto S = builtin("grushin");
    Vec p(2), v(2);
    p << 0.4, 0.1;
    v << 0.3, 0.08;
    for (auto _ : state) benchmark::DoNotOptimize(minimal_norm_preimage(S, p, v));
}
BENCHMARK(BM_MinimalNormPreimage);

void BM_BuildCalibration(benchmark::State& state) {
    auto S = builtin("heisenberg");
    for (auto _ : state)
        benchmark::DoNotOptimize(build_calibration(S, Vec::Zero(3), 0.2, state.range(0)));
}
BENCHMARK(BM_BuildCalibration)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);

void BM_EvaluateCalibration(benchmark::State& state) {
    auto S = builtin("heisenberg");
    auto CF = build_calibration(S, Vec::Zero(3), 0.2);
    Vec x = vec3(0.05, 0.02, -0.01);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_calibration(CF, x));
}
BENCHMARK(BM_EvaluateCalibration);

void BM_DistanceUpper(benchmark::State& state) {
    auto S = builtin("heisenberg");
    DistanceOptions opts;
    opts.restarts = 2;
    for (auto _ : state)
        benchmark::DoNotOptimize(distance_upper(S, Vec::Zero(3), vec3(0.3, 0.2, 0.02), opts));
}
BENCHMARK(BM_DistanceUpper)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
