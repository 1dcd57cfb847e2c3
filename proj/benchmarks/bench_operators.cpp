#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include "runaway/frame.hpp"
#include "runaway/friction.hpp"
#include "runaway/integrator.hpp"
#include "runaway/landau.hpp"
#include "runaway/moments.hpp"

using namespace runaway;

namespace {

Distribution shifted(int N) {
    return maxwellian(build_grid(8.0, N), {0.8, -0.3, 0.1}, 1.2);
}

void BM_CollisionQ(benchmark::State& state) {
    const Distribution F = shifted(static_cast<int>(state.range(0)));
    collision_Q(F, F);  // builds the cached kernel transforms
    for (auto _ : state) benchmark::DoNotOptimize(collision_Q(F, F));
}
BENCHMARK(BM_CollisionQ)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SphericalDiffusion(benchmark::State& state) {
    const Distribution F = shifted(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(spherical_diffusion(F));
}
BENCHMARK(BM_SphericalDiffusion)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_FrictionR(benchmark::State& state) {
    const Distribution F = shifted(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(friction_R(F));
}
BENCHMARK(BM_FrictionR)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ToFrame(benchmark::State& state) {
    const Distribution F = shifted(static_cast<int>(state.range(0)));
    const MomentSet m = moments(F);
    MacroState s;
    s.V = m.bulk;
    s.T = m.temperature;
    for (auto _ : state) benchmark::DoNotOptimize(to_frame(F, s));
}
BENCHMARK(BM_ToFrame)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
    SimConfig c;
    c.N = static_cast<int>(state.range(0));
    c.field.E = {20.0, 0.0, 0.0};
    c.mode = state.range(1) ? SimMode::Frame : SimMode::Lab;
    SimState s = initial_state(c);
    const double dt = stability_dt(s, c);
    for (auto _ : state) {
        SimState work = s;
        step(work, c, dt);
        benchmark::DoNotOptimize(work.macro.T);
    }
}
BENCHMARK(BM_Step)->Args({16, 0})->Args({16, 1})->Args({32, 0})->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);  // per-step positivity warnings
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
}
