#include <benchmark/benchmark.h>

#include <map>
#include <optional>

#include "mridvr/error.hpp"
#include "mridvr/gpu_engine.hpp"
#include "mridvr/morphology.hpp"
#include "mridvr/phantom.hpp"
#include "mridvr/radiometry.hpp"
#include "mridvr/raymarch.hpp"

using namespace mridvr;

namespace {

const io::Volume& phantom_volume(std::int32_t n) {
    static std::map<std::int32_t, io::Volume> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, phantom::generate(phantom::Preset::cohort_a, {n, n, n})).first;
    return it->second;
}

void BM_Normalize(benchmark::State& state) {
    const io::Volume& v = phantom_volume(static_cast<std::int32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(radiometry::normalize(v));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.voxels.size()));
}
BENCHMARK(BM_Normalize)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Histogram(benchmark::State& state) {
    const NormalizedVolume nv = radiometry::normalize(phantom_volume(static_cast<std::int32_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(radiometry::build_histogram(nv));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(nv.values.size()));
}
BENCHMARK(BM_Histogram)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
    const NormalizedVolume nv = radiometry::normalize(phantom_volume(static_cast<std::int32_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(morphology::gradient_field(nv));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(nv.values.size()));
}
BENCHMARK(BM_Gradient)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Curvature(benchmark::State& state) {
    const NormalizedVolume nv = radiometry::normalize(phantom_volume(static_cast<std::int32_t>(state.range(0))));
    const morphology::GradientField g = morphology::gradient_field(nv);
    for (auto _ : state) benchmark::DoNotOptimize(morphology::directional_curvature(nv, g));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(nv.values.size()));
}
BENCHMARK(BM_Curvature)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CpuRender(benchmark::State& state) {
    const io::Volume& v = phantom_volume(128);
    const raymarch::PreparedVolume pv = raymarch::prepare(v);
    const auto size = static_cast<std::int32_t>(state.range(0));
    const transfer::RenderParams rp = transfer::default_render_params(v.spacing());
    const raymarch::Camera cam = raymarch::orbit_camera(v.dims(), v.spacing(), 30, 20, 330);
    for (auto _ : state) benchmark::DoNotOptimize(raymarch::render(pv, {}, rp, cam, size, size));
    state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_CpuRender)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

std::optional<gpu::GpuContext>& context() {
    static std::optional<gpu::GpuContext> ctx = [] () -> std::optional<gpu::GpuContext> {
        try {
            return gpu::init_context();
        } catch (const Error&) {
            return std::nullopt;
        }
    }();
    return ctx;
}

void BM_GpuPreprocess(benchmark::State& state) {
    if (!context()) {
        state.SkipWithError("no OpenCL device");
        return;
    }
    const io::Volume& v = phantom_volume(static_cast<std::int32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gpu::upload_and_preprocess(*context(), v));
}
BENCHMARK(BM_GpuPreprocess)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_GpuFrame(benchmark::State& state) {
    if (!context()) {
        state.SkipWithError("no OpenCL device");
        return;
    }
    const io::Volume& v = phantom_volume(128);
    const gpu::GpuVolume gv = gpu::upload_and_preprocess(*context(), v);
    const auto size = static_cast<std::int32_t>(state.range(0));
    transfer::RenderParams rp = transfer::default_render_params(v.spacing());
    float az = 0.0f;
    for (auto _ : state) {
        // Per-frame parameter write, as in interactive use.
        gpu::set_params(*context(), gv, {}, rp, raymarch::orbit_camera(v.dims(), v.spacing(), az, 20, 330));
        benchmark::DoNotOptimize(gpu::render_frame(*context(), gv, size, size));
        az += 3.0f;
    }
    state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_GpuFrame)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
