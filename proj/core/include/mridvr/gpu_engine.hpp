#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mridvr/morphology.hpp"
#include "mridvr/raymarch.hpp"
#include "mridvr/transfer.hpp"
#include "mridvr/volume_io.hpp"

namespace mridvr::gpu {

// high_performance: discrete GPU first. low_power: integrated GPU first. gpu_only: refuse
// CPU-type (fallback) devices. none: behave as if no adapter exists.
enum class AdapterPreference { high_performance, low_power, gpu_only, none };

// Reads MRIDVR_ADAPTER (high-performance | low-power | gpu-only | none); unset means
// high_performance. Throws InvalidParams on an unknown value.
AdapterPreference adapter_preference_from_env();

struct ContextOptions {
    std::optional<AdapterPreference> preference;  // empty: adapter_preference_from_env()
    std::int32_t max_extent_override = 0;          // > 0 lowers the per-axis volume limit
};

struct DeviceInfo {
    std::string name;
    std::string vendor;
    std::string platform;
    std::string version;
    bool gpu = false;
    bool integrated = false;
    bool fallback = false;  // CPU-type device standing in for a GPU
    std::int32_t max_extent = 0;
    std::size_t max_work_group = 0;
    std::uint64_t max_alloc_bytes = 0;
    bool correctly_rounded_divide = false;
};

class GpuVolume;

// One device, queue and compiled kernel set. Not thread-safe; drive it from one thread.
class GpuContext {
public:
    struct Impl;

    explicit GpuContext(std::shared_ptr<Impl> impl);

    const DeviceInfo& device() const;
    std::uint64_t preprocess_dispatches() const;
    std::uint64_t render_dispatches() const;

    Impl& impl() const { return *impl_; }
    const std::shared_ptr<Impl>& shared() const { return impl_; }

private:
    std::shared_ptr<Impl> impl_;
};

// Throws GpuUnavailable when no acceptable adapter exists; callers fall back to raymarch::render.
GpuContext init_context(const ContextOptions& options = {});

// Device-resident normalized intensity, gradient (xyz + magnitude), curvature and scalars.
class GpuVolume {
public:
    struct Buffers;

    Dims dims;
    Spacing spacing;
    float i_min = 0.0f;
    float i_max = 0.0f;
    float grad_max = 0.0f;
    float kappa_scale = 1.0f;

    std::vector<float> download_normalized() const;
    morphology::GradientField download_gradient() const;
    morphology::CurvatureField download_curvature() const;

    std::shared_ptr<Buffers> buffers;
};

// Uploads raw intensities, normalizes on the device and runs the gradient, curvature and
// reduction passes once. Throws VolumeTooLarge or DegenerateRange.
GpuVolume upload_and_preprocess(GpuContext& ctx, const io::Volume& volume);

// Writes the parameter block; never dispatches preprocessing. Throws InvalidParams or
// DegenerateCamera for bad input.
void set_params(GpuContext& ctx, const GpuVolume& gv, const transfer::TissueWindows& tw,
                const transfer::RenderParams& rp, const raymarch::Camera& cam);

// One raymarch dispatch plus readback. Throws InvalidParams when set_params was not called for
// this volume, DeviceLost when the queue fails.
raymarch::FrameBuffer render_frame(GpuContext& ctx, const GpuVolume& gv, std::int32_t width, std::int32_t height);

struct FrameSetup {
    transfer::TissueWindows windows;
    transfer::RenderParams params;
    raymarch::Camera camera;
};

struct TtfpResult {
    double ttfp_ms = 0.0;
    GpuVolume volume;
    FrameSetup setup;
    raymarch::FrameBuffer frame;
};

// Wall time from the start of parsing through load, normalize, upload, preprocessing,
// set_params and the first completed readback. `setup` sees the parsed volume.
TtfpResult measure_ttfp(GpuContext& ctx, std::span<const std::byte> nifti_bytes,
                        const std::function<FrameSetup(const io::Volume&)>& setup, std::int32_t width,
                        std::int32_t height);

struct FpsResult {
    double fps = 0.0;
    std::vector<double> frame_times_ms;
};

// Renders for `seconds` while orbiting the camera a full turn about the vertical axis through
// its target and oscillating the GM multiplier; each frame goes through set_params.
FpsResult measure_fps(GpuContext& ctx, const GpuVolume& gv, const FrameSetup& setup, double seconds,
                      std::int32_t width, std::int32_t height);

struct BenchReport {
    double ttfp_ms = 0.0;
    double fps = 0.0;
    std::vector<double> frame_times_ms;
    std::int32_t width = 0;
    std::int32_t height = 0;
    Dims dims;
    std::string device_name;

    std::string to_json(bool pretty = true) const;
};

} // namespace mridvr::gpu
