#include "mridvr/gpu_engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <string_view>
#include <unordered_map>

#include "kernel_source.hpp"
#include "mridvr/error.hpp"
#include "mridvr/param_block.hpp"
#include "mridvr/radiometry.hpp"
#include "opencl_api.hpp"

namespace mridvr::gpu {

using namespace cl;

namespace {

constexpr std::int32_t kDefaultMaxExtent = 2048;
constexpr std::size_t kMaxLocalSize = 256;
constexpr std::size_t kMaxReductionGroups = 256;

[[noreturn]] void lost(const std::string& what, cl_int code) {
    throw Error(ErrorCode::DeviceLost, what + " failed: " + error_name(code));
}

void check(cl_int code, const char* what) {
    if (code != CL_SUCCESS) lost(what, code);
}

std::string device_string(const Api& api, cl_device_id dev, cl_device_info what) {
    std::size_t size = 0;
    if (api.GetDeviceInfo(dev, what, 0, nullptr, &size) != CL_SUCCESS || size == 0) return {};
    std::string s(size, '\0');
    api.GetDeviceInfo(dev, what, size, s.data(), nullptr);
    while (!s.empty() && s.back() == '\0') s.pop_back();
    return s;
}

template <typename T>
T device_value(const Api& api, cl_device_id dev, cl_device_info what) {
    T v{};
    if (api.GetDeviceInfo(dev, what, sizeof(T), &v, nullptr) != CL_SUCCESS) return T{};
    return v;
}

std::string platform_string(const Api& api, cl_platform_id p, cl_platform_info what) {
    std::size_t size = 0;
    if (api.GetPlatformInfo(p, what, 0, nullptr, &size) != CL_SUCCESS || size == 0) return {};
    std::string s(size, '\0');
    api.GetPlatformInfo(p, what, size, s.data(), nullptr);
    while (!s.empty() && s.back() == '\0') s.pop_back();
    return s;
}

struct Candidate {
    cl_platform_id platform = nullptr;
    cl_device_id device = nullptr;
    DeviceInfo info;
};

int rank(const DeviceInfo& d, AdapterPreference pref) {
    if (d.gpu) {
        const bool preferred = pref == AdapterPreference::low_power ? d.integrated : !d.integrated;
        return preferred ? 0 : 1;
    }
    return d.fallback ? 3 : 2;
}

std::vector<Candidate> enumerate(const Api& api) {
    std::vector<Candidate> out;
    cl_uint np = 0;
    if (api.GetPlatformIDs(0, nullptr, &np) != CL_SUCCESS || np == 0) return out;
    std::vector<cl_platform_id> platforms(np);
    if (api.GetPlatformIDs(np, platforms.data(), nullptr) != CL_SUCCESS) return out;
    for (cl_platform_id p : platforms) {
        cl_uint nd = 0;
        if (api.GetDeviceIDs(p, CL_DEVICE_TYPE_ALL, 0, nullptr, &nd) != CL_SUCCESS || nd == 0) continue;
        std::vector<cl_device_id> devices(nd);
        if (api.GetDeviceIDs(p, CL_DEVICE_TYPE_ALL, nd, devices.data(), nullptr) != CL_SUCCESS) continue;
        for (cl_device_id dev : devices) {
            Candidate c{p, dev, {}};
            DeviceInfo& d = c.info;
            const auto type = device_value<cl_device_type>(api, dev, CL_DEVICE_TYPE);
            d.name = device_string(api, dev, CL_DEVICE_NAME);
            d.vendor = device_string(api, dev, CL_DEVICE_VENDOR);
            d.version = device_string(api, dev, CL_DEVICE_VERSION);
            d.platform = platform_string(api, p, CL_PLATFORM_NAME);
            d.gpu = (type & CL_DEVICE_TYPE_GPU) != 0;
            d.fallback = (type & CL_DEVICE_TYPE_CPU) != 0 && !d.gpu;
            d.integrated = device_value<cl_bool>(api, dev, CL_DEVICE_HOST_UNIFIED_MEMORY) != 0;
            d.max_work_group = device_value<std::size_t>(api, dev, CL_DEVICE_MAX_WORK_GROUP_SIZE);
            d.max_alloc_bytes = device_value<cl_ulong>(api, dev, CL_DEVICE_MAX_MEM_ALLOC_SIZE);
            d.correctly_rounded_divide =
                (device_value<cl_bitfield>(api, dev, CL_DEVICE_SINGLE_FP_CONFIG) & CL_FP_CORRECTLY_ROUNDED_DIVIDE_SQRT) != 0;
            d.max_extent = kDefaultMaxExtent;
            if (device_value<cl_bool>(api, dev, CL_DEVICE_IMAGE_SUPPORT) != 0) {
                const auto w = device_value<std::size_t>(api, dev, CL_DEVICE_IMAGE3D_MAX_WIDTH);
                const auto h = device_value<std::size_t>(api, dev, CL_DEVICE_IMAGE3D_MAX_HEIGHT);
                const auto z = device_value<std::size_t>(api, dev, CL_DEVICE_IMAGE3D_MAX_DEPTH);
                const std::size_t m = std::min({w, h, z});
                if (m > 0) d.max_extent = static_cast<std::int32_t>(std::min<std::size_t>(m, 1 << 16));
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::size_t pow2_floor(std::size_t v) {
    std::size_t p = 1;
    while (p * 2 <= v) p *= 2;
    return p;
}

} // namespace

AdapterPreference adapter_preference_from_env() {
    const char* v = std::getenv("MRIDVR_ADAPTER");
    if (v == nullptr || *v == '\0') return AdapterPreference::high_performance;
    const std::string_view s(v);
    if (s == "high-performance") return AdapterPreference::high_performance;
    if (s == "low-power") return AdapterPreference::low_power;
    if (s == "gpu-only") return AdapterPreference::gpu_only;
    if (s == "none") return AdapterPreference::none;
    throw Error(ErrorCode::InvalidParams, "MRIDVR_ADAPTER must be high-performance, low-power, gpu-only or none");
}

struct GpuContext::Impl {
    std::shared_ptr<const Api> api;
    DeviceInfo info;
    std::int32_t max_extent = 0;
    cl_device_id device = nullptr;
    cl_context context = nullptr;
    cl_command_queue queue = nullptr;
    cl_program program = nullptr;
    std::unordered_map<std::string, cl_kernel> kernels;
    std::size_t local_size = 64;

    cl_mem params = nullptr;
    const void* params_owner = nullptr;  // Buffers the current block was written for
    cl_mem out32 = nullptr;
    cl_mem out8 = nullptr;
    std::size_t out_pixels = 0;

    std::uint64_t preprocess_count = 0;
    std::uint64_t render_count = 0;

    Impl() = default;
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;

    ~Impl() {
        if (!api) return;
        for (cl_mem m : {params, out32, out8}) {
            if (m != nullptr) api->ReleaseMemObject(m);
        }
        for (auto& [name, k] : kernels) api->ReleaseKernel(k);
        if (program != nullptr) api->ReleaseProgram(program);
        if (queue != nullptr) api->ReleaseCommandQueue(queue);
        if (context != nullptr) api->ReleaseContext(context);
    }

    cl_kernel kernel(const char* name) {
        auto it = kernels.find(name);
        if (it != kernels.end()) return it->second;
        cl_int err = CL_SUCCESS;
        cl_kernel k = api->CreateKernel(program, name, &err);
        if (err != CL_SUCCESS) throw Error(ErrorCode::GpuUnavailable, std::string("kernel ") + name + ": " + error_name(err));
        kernels.emplace(name, k);
        return k;
    }

    cl_mem buffer(std::size_t bytes, cl_mem_flags flags = CL_MEM_READ_WRITE) {
        cl_int err = CL_SUCCESS;
        cl_mem m = api->CreateBuffer(context, flags, bytes, nullptr, &err);
        if (err != CL_SUCCESS) {
            throw Error(ErrorCode::VolumeTooLarge, "device allocation of " + std::to_string(bytes) +
                                                       " bytes failed: " + error_name(err));
        }
        return m;
    }

    void write(cl_mem m, const void* data, std::size_t bytes) {
        check(api->EnqueueWriteBuffer(queue, m, CL_TRUE, 0, bytes, data, 0, nullptr, nullptr), "buffer write");
    }

    void read(cl_mem m, void* data, std::size_t bytes, std::size_t offset = 0) const {
        check(api->EnqueueReadBuffer(queue, m, CL_TRUE, offset, bytes, data, 0, nullptr, nullptr), "buffer read");
    }

    template <typename T>
    void arg(cl_kernel k, cl_uint index, const T& value) {
        check(api->SetKernelArg(k, index, sizeof(T), &value), "kernel argument");
    }

    void local_arg(cl_kernel k, cl_uint index, std::size_t bytes) {
        check(api->SetKernelArg(k, index, bytes, nullptr), "local kernel argument");
    }

    void dispatch(cl_kernel k, cl_uint dims, const std::size_t* global, const std::size_t* local) {
        check(api->EnqueueNDRangeKernel(queue, k, dims, nullptr, global, local, 0, nullptr, nullptr), "dispatch");
    }

    void finish() { check(api->Finish(queue), "queue finish"); }
};

struct GpuVolume::Buffers {
    std::shared_ptr<GpuContext::Impl> owner;
    std::size_t count = 0;
    cl_mem intensity = nullptr;
    cl_mem gradient = nullptr;
    cl_mem curvature = nullptr;
    cl_mem scalars = nullptr;

    Buffers() = default;
    Buffers(const Buffers&) = delete;
    Buffers& operator=(const Buffers&) = delete;

    ~Buffers() {
        for (cl_mem m : {intensity, gradient, curvature, scalars}) {
            if (m != nullptr) owner->api->ReleaseMemObject(m);
        }
        if (owner->params_owner == this) owner->params_owner = nullptr;
    }
};

GpuContext::GpuContext(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

const DeviceInfo& GpuContext::device() const { return impl_->info; }

std::uint64_t GpuContext::preprocess_dispatches() const { return impl_->preprocess_count; }

std::uint64_t GpuContext::render_dispatches() const { return impl_->render_count; }

GpuContext init_context(const ContextOptions& options) {
    const AdapterPreference pref = options.preference.value_or(adapter_preference_from_env());
    if (pref == AdapterPreference::none) throw Error(ErrorCode::GpuUnavailable, "adapter disabled by preference");

    std::string reason;
    auto api = load_api(reason);
    if (!api) throw Error(ErrorCode::GpuUnavailable, reason);

    std::vector<Candidate> candidates = enumerate(*api);
    if (pref == AdapterPreference::gpu_only) {
        std::erase_if(candidates, [](const Candidate& c) { return !c.info.gpu; });
    }
    if (candidates.empty()) throw Error(ErrorCode::GpuUnavailable, "no OpenCL device found");
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        return rank(a.info, pref) < rank(b.info, pref);
    });

    std::string failures;
    for (const Candidate& c : candidates) {
        auto impl = std::make_shared<GpuContext::Impl>();
        impl->api = api;
        impl->info = c.info;
        impl->device = c.device;
        impl->max_extent = options.max_extent_override > 0 ? std::min(options.max_extent_override, c.info.max_extent)
                                                           : c.info.max_extent;
        impl->info.max_extent = impl->max_extent;

        const cl_context_properties props[] = {CL_CONTEXT_PLATFORM, reinterpret_cast<cl_context_properties>(c.platform),
                                               0};
        cl_int err = CL_SUCCESS;
        impl->context = api->CreateContext(props, 1, &c.device, nullptr, nullptr, &err);
        if (err != CL_SUCCESS) {
            failures += c.info.name + ": context " + error_name(err) + "; ";
            continue;
        }
        impl->queue = api->CreateCommandQueue(impl->context, c.device, 0, &err);
        if (err != CL_SUCCESS) {
            failures += c.info.name + ": queue " + error_name(err) + "; ";
            continue;
        }
        const std::string_view src = embedded_kernel_source();
        const char* text = src.data();
        const std::size_t len = src.size();
        impl->program = api->CreateProgramWithSource(impl->context, 1, &text, &len, &err);
        if (err != CL_SUCCESS) {
            failures += c.info.name + ": program " + error_name(err) + "; ";
            continue;
        }
        std::string build_options = "-cl-std=CL1.2";
        if (c.info.correctly_rounded_divide) build_options += " -cl-fp32-correctly-rounded-divide-sqrt";
        err = api->BuildProgram(impl->program, 1, &c.device, build_options.c_str(), nullptr, nullptr);
        if (err != CL_SUCCESS) {
            std::size_t size = 0;
            api->GetProgramBuildInfo(impl->program, c.device, CL_PROGRAM_BUILD_LOG, 0, nullptr, &size);
            std::string log(size, '\0');
            api->GetProgramBuildInfo(impl->program, c.device, CL_PROGRAM_BUILD_LOG, size, log.data(), nullptr);
            failures += c.info.name + ": build " + error_name(err) + " " + log + "; ";
            continue;
        }

        std::size_t kernel_limit = 0;
        api->GetKernelWorkGroupInfo(impl->kernel("max_partial"), c.device, CL_KERNEL_WORK_GROUP_SIZE,
                                    sizeof(kernel_limit), &kernel_limit, nullptr);
        if (kernel_limit == 0) kernel_limit = std::max<std::size_t>(c.info.max_work_group, 1);
        impl->local_size = pow2_floor(std::min({kMaxLocalSize, kernel_limit, std::max<std::size_t>(c.info.max_work_group, 1)}));
        impl->params = impl->buffer(sizeof(ParamBlock), CL_MEM_READ_ONLY);
        return GpuContext(std::move(impl));
    }
    throw Error(ErrorCode::GpuUnavailable, "no usable OpenCL device: " + failures);
}

namespace {

// Two-stage tree reduction over n items: per-group partials, then one group combines them.
void reduce(GpuContext::Impl& ctx, const char* partial_name, const char* combine_name, cl_mem in, cl_uint n,
            std::size_t partial_elem, cl_mem scalars, cl_uint out_index) {
    const std::size_t ls = ctx.local_size;
    const std::size_t groups = std::clamp<std::size_t>((n + ls - 1) / ls, 1, kMaxReductionGroups);
    cl_mem partials = ctx.buffer(groups * partial_elem);
    try {
        cl_kernel k = ctx.kernel(partial_name);
        ctx.arg(k, 0, in);
        ctx.arg(k, 1, n);
        ctx.arg(k, 2, partials);
        ctx.local_arg(k, 3, ls * partial_elem);
        const std::size_t global = groups * ls;
        ctx.dispatch(k, 1, &global, &ls);

        cl_kernel c = ctx.kernel(combine_name);
        const auto ng = static_cast<cl_uint>(groups);
        ctx.arg(c, 0, partials);
        ctx.arg(c, 1, ng);
        ctx.arg(c, 2, scalars);
        ctx.arg(c, 3, out_index);
        ctx.local_arg(c, 4, ls * partial_elem);
        ctx.dispatch(c, 1, &ls, &ls);
        ctx.preprocess_count += 2;
        ctx.finish();
    } catch (...) {
        ctx.api->ReleaseMemObject(partials);
        throw;
    }
    ctx.api->ReleaseMemObject(partials);
}

// Exact nearest-rank selection over |kappa| bit patterns, one byte per pass from the top.
float select_kappa_scale(GpuContext::Impl& ctx, GpuVolume::Buffers& b) {
    const std::size_t ls = ctx.local_size;
    const std::size_t groups = std::clamp<std::size_t>((b.count + ls - 1) / ls, 1, kMaxReductionGroups);
    const std::size_t global = groups * ls;
    const auto n = static_cast<cl_uint>(b.count);
    cl_mem hist = ctx.buffer(256 * sizeof(cl_uint));
    const std::array<cl_uint, 256> zeros{};
    std::array<cl_uint, 256> counts{};
    cl_uint prefix = 0;
    cl_uint mask = 0;
    std::size_t rank = 0;
    bool empty = false;
    try {
        cl_kernel k = ctx.kernel("kappa_radix_histogram");
        for (int pass = 0; pass < 4 && !empty; ++pass) {
            const cl_uint shift = static_cast<cl_uint>(24 - 8 * pass);
            ctx.write(hist, zeros.data(), sizeof(zeros));
            ctx.arg(k, 0, b.curvature);
            ctx.arg(k, 1, b.intensity);
            ctx.arg(k, 2, n);
            ctx.arg(k, 3, prefix);
            ctx.arg(k, 4, mask);
            ctx.arg(k, 5, shift);
            ctx.arg(k, 6, hist);
            ctx.local_arg(k, 7, 256 * sizeof(cl_uint));
            ctx.dispatch(k, 1, &global, &ls);
            ++ctx.preprocess_count;
            ctx.read(hist, counts.data(), sizeof(counts));
            if (pass == 0) {
                std::size_t total = 0;
                for (cl_uint c : counts) total += c;
                if (total == 0) {
                    empty = true;
                    break;
                }
                rank = morphology::percentile_rank(total);
            }
            std::size_t digit = 0;
            while (rank >= counts[digit]) rank -= counts[digit++];
            prefix |= static_cast<cl_uint>(digit) << shift;
            mask |= 0xFFu << shift;
        }
    } catch (...) {
        ctx.api->ReleaseMemObject(hist);
        throw;
    }
    ctx.api->ReleaseMemObject(hist);
    if (empty) return 1.0f;
    const float v = std::bit_cast<float>(prefix);
    return v > 0.0f ? v : 1.0f;
}

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

} // namespace

GpuVolume upload_and_preprocess(GpuContext& context, const io::Volume& volume) {
    GpuContext::Impl& ctx = context.impl();
    const Dims d = volume.dims();
    const std::size_t n = d.voxel_count();
    if (d.x > ctx.max_extent || d.y > ctx.max_extent || d.z > ctx.max_extent) {
        throw Error(ErrorCode::VolumeTooLarge, "volume extent exceeds the device limit of " +
                                                   std::to_string(ctx.max_extent) + " voxels per axis");
    }
    if (n * 4 * sizeof(float) > ctx.info.max_alloc_bytes || n > 0xFFFFFFFFull) {
        throw Error(ErrorCode::VolumeTooLarge, "gradient field exceeds the device allocation limit");
    }
    if (volume.voxels.size() != n) throw Error(ErrorCode::PreprocessMismatch, "voxel count does not match dims");
    if (d.x < 3 || d.y < 3 || d.z < 3) throw Error(ErrorCode::VolumeTooSmall, "every axis needs at least 3 voxels");

    auto b = std::make_shared<GpuVolume::Buffers>();
    b->owner = context.shared();
    b->count = n;
    b->scalars = ctx.buffer(4 * sizeof(float));
    b->intensity = ctx.buffer(n * sizeof(float));
    b->gradient = ctx.buffer(n * 4 * sizeof(float));
    b->curvature = ctx.buffer(n * sizeof(float));

    // Raw intensities go to the curvature buffer first; it is free until the curvature pass.
    ctx.write(b->curvature, volume.voxels.data(), n * sizeof(float));
    const auto count = static_cast<cl_uint>(n);
    reduce(ctx, "minmax_partial", "minmax_combine", b->curvature, count, 2 * sizeof(float), b->scalars,
           static_cast<cl_uint>(0));
    std::array<float, 2> range{};
    ctx.read(b->scalars, range.data(), sizeof(range));
    if (!(range[1] > range[0])) {
        throw Error(ErrorCode::DegenerateRange, "i_max equals i_min; a constant volume carries no structure");
    }

    const std::size_t ls = ctx.local_size;
    {
        cl_kernel k = ctx.kernel("normalize_intensity");
        ctx.arg(k, 0, b->curvature);
        ctx.arg(k, 1, count);
        ctx.arg(k, 2, b->scalars);
        ctx.arg(k, 3, b->intensity);
        const std::size_t global = round_up(n, ls);
        ctx.dispatch(k, 1, &global, &ls);
        ++ctx.preprocess_count;
    }

    const cl_int dims4[4] = {d.x, d.y, d.z, 0};
    const Spacing h = volume.spacing();
    const float spacing4[4] = {h.x, h.y, h.z, 0.0f};
    const std::size_t grid[3] = {static_cast<std::size_t>(d.x), static_cast<std::size_t>(d.y),
                                 static_cast<std::size_t>(d.z)};
    {
        cl_kernel k = ctx.kernel("gradient");
        ctx.arg(k, 0, b->intensity);
        ctx.arg(k, 1, dims4);
        ctx.arg(k, 2, spacing4);
        ctx.arg(k, 3, b->gradient);
        ctx.dispatch(k, 3, grid, nullptr);
        ++ctx.preprocess_count;
    }
    {
        cl_kernel k = ctx.kernel("curvature");
        ctx.arg(k, 0, b->intensity);
        ctx.arg(k, 1, b->gradient);
        ctx.arg(k, 2, dims4);
        ctx.arg(k, 3, spacing4);
        ctx.arg(k, 4, b->curvature);
        ctx.dispatch(k, 3, grid, nullptr);
        ++ctx.preprocess_count;
    }
    reduce(ctx, "max_partial", "max_combine", b->gradient, count, sizeof(float), b->scalars, static_cast<cl_uint>(2));

    GpuVolume gv;
    gv.dims = d;
    gv.spacing = h;
    gv.kappa_scale = select_kappa_scale(ctx, *b);
    std::array<float, 4> scalars{};
    ctx.read(b->scalars, scalars.data(), sizeof(scalars));
    scalars[3] = gv.kappa_scale;
    ctx.write(b->scalars, scalars.data(), sizeof(scalars));
    ctx.finish();

    gv.i_min = scalars[0];
    gv.i_max = scalars[1];
    gv.grad_max = scalars[2];
    gv.buffers = std::move(b);
    return gv;
}

namespace {

void require_owner(const GpuContext& ctx, const GpuVolume& gv) {
    if (!gv.buffers || gv.buffers->owner.get() != &ctx.impl()) {
        throw Error(ErrorCode::InvalidParams, "volume was not uploaded through this context");
    }
}

} // namespace

std::vector<float> GpuVolume::download_normalized() const {
    std::vector<float> out(buffers->count);
    buffers->owner->read(buffers->intensity, out.data(), out.size() * sizeof(float));
    return out;
}

morphology::GradientField GpuVolume::download_gradient() const {
    std::vector<float> raw(buffers->count * 4);
    buffers->owner->read(buffers->gradient, raw.data(), raw.size() * sizeof(float));
    morphology::GradientField g;
    g.dims = dims;
    g.vectors.resize(buffers->count);
    g.magnitudes.resize(buffers->count);
    for (std::size_t i = 0; i < buffers->count; ++i) {
        g.vectors[i] = {raw[4 * i], raw[4 * i + 1], raw[4 * i + 2]};
        g.magnitudes[i] = raw[4 * i + 3];
    }
    g.grad_max = grad_max;
    return g;
}

morphology::CurvatureField GpuVolume::download_curvature() const {
    morphology::CurvatureField c;
    c.dims = dims;
    c.kappa.resize(buffers->count);
    buffers->owner->read(buffers->curvature, c.kappa.data(), c.kappa.size() * sizeof(float));
    return c;
}

void set_params(GpuContext& context, const GpuVolume& gv, const transfer::TissueWindows& tw,
                const transfer::RenderParams& rp, const raymarch::Camera& cam) {
    require_owner(context, gv);
    GpuContext::Impl& ctx = context.impl();
    const ParamBlock block = make_param_block(tw, rp, cam, gv.dims, gv.spacing);
    ctx.write(ctx.params, &block, sizeof(block));
    ctx.params_owner = gv.buffers.get();
}

raymarch::FrameBuffer render_frame(GpuContext& context, const GpuVolume& gv, std::int32_t width, std::int32_t height) {
    require_owner(context, gv);
    GpuContext::Impl& ctx = context.impl();
    if (ctx.params_owner != gv.buffers.get()) {
        throw Error(ErrorCode::InvalidParams, "set_params has not been called for this volume");
    }
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidParams, "image size must be positive");

    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (pixels != ctx.out_pixels) {
        for (cl_mem* m : {&ctx.out32, &ctx.out8}) {
            if (*m != nullptr) ctx.api->ReleaseMemObject(*m);
            *m = nullptr;
        }
        ctx.out_pixels = 0;
        ctx.out32 = ctx.buffer(pixels * 4 * sizeof(float));
        ctx.out8 = ctx.buffer(pixels * 4);
        ctx.out_pixels = pixels;
    }

    const GpuVolume::Buffers& b = *gv.buffers;
    cl_kernel k = ctx.kernel("raymarch");
    ctx.arg(k, 0, ctx.params);
    ctx.arg(k, 1, b.intensity);
    ctx.arg(k, 2, b.gradient);
    ctx.arg(k, 3, b.curvature);
    ctx.arg(k, 4, b.scalars);
    ctx.arg(k, 5, static_cast<cl_int>(width));
    ctx.arg(k, 6, static_cast<cl_int>(height));
    ctx.arg(k, 7, ctx.out32);
    ctx.arg(k, 8, ctx.out8);
    const std::size_t global[2] = {static_cast<std::size_t>(width), static_cast<std::size_t>(height)};
    ctx.dispatch(k, 2, global, nullptr);
    ++ctx.render_count;

    raymarch::FrameBuffer fb;
    fb.width = width;
    fb.height = height;
    fb.rgba32.resize(pixels * 4);
    fb.rgba8.resize(pixels * 4);
    ctx.read(ctx.out32, fb.rgba32.data(), fb.rgba32.size() * sizeof(float));
    ctx.read(ctx.out8, fb.rgba8.data(), fb.rgba8.size());
    return fb;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

TtfpResult measure_ttfp(GpuContext& ctx, std::span<const std::byte> nifti_bytes,
                        const std::function<FrameSetup(const io::Volume&)>& setup, std::int32_t width,
                        std::int32_t height) {
    const auto t0 = Clock::now();
    const io::Volume volume = io::load_volume(nifti_bytes);
    TtfpResult r;
    r.setup = setup(volume);
    r.volume = upload_and_preprocess(ctx, volume);
    set_params(ctx, r.volume, r.setup.windows, r.setup.params, r.setup.camera);
    r.frame = render_frame(ctx, r.volume, width, height);
    r.ttfp_ms = ms_since(t0);
    return r;
}

FpsResult measure_fps(GpuContext& ctx, const GpuVolume& gv, const FrameSetup& setup, double seconds,
                      std::int32_t width, std::int32_t height) {
    const raymarch::Camera& base = setup.camera;
    const Vec3 offset = base.eye - base.target;
    const float radius = std::hypot(offset.x, offset.y);
    const float az0 = std::atan2(offset.y, offset.x);

    FpsResult r;
    double total_ms = 0.0;
    const double budget_ms = std::max(seconds, 0.0) * 1000.0;
    do {
        const double phase = budget_ms > 0.0 ? std::min(total_ms / budget_ms, 1.0) : 0.0;
        const auto az = static_cast<float>(az0 + 2.0 * std::numbers::pi * phase);
        raymarch::Camera cam = base;
        if (radius > 0.0f) {
            cam.eye = {base.target.x + radius * std::cos(az), base.target.y + radius * std::sin(az), base.eye.z};
        }
        transfer::RenderParams rp = setup.params;
        const auto gm = static_cast<std::size_t>(transfer::TissueClass::gm);
        rp.class_multiplier[gm] =
            setup.params.class_multiplier[gm] * static_cast<float>(0.5 + 0.5 * std::cos(4.0 * std::numbers::pi * phase));

        const auto t0 = Clock::now();
        set_params(ctx, gv, setup.windows, rp, cam);
        render_frame(ctx, gv, width, height);
        const double dt = ms_since(t0);
        r.frame_times_ms.push_back(dt);
        total_ms += dt;
    } while (total_ms < budget_ms);
    r.fps = total_ms > 0.0 ? static_cast<double>(r.frame_times_ms.size()) / (total_ms / 1000.0) : 0.0;
    return r;
}

std::string BenchReport::to_json(bool pretty) const {
    const nlohmann::json j = {
        {"ttfp_ms", ttfp_ms},
        {"fps", fps},
        {"frame_times_ms", frame_times_ms},
        {"width", width},
        {"height", height},
        {"dims", {dims.x, dims.y, dims.z}},
        {"device_name", device_name},
        {"definitions",
         {{"ttfp", "parse→first readback"},
          {"fps", "frames / sum(frame_times_ms); each frame = set_params + render + readback"}}},
        {"reference", {{"ttfp_ms_healthy", 917.00}, {"ttfp_ms_pathological", 750.40}, {"fps", 82.0}}},
    };
    return j.dump(pretty ? 2 : -1);
}

} // namespace mridvr::gpu
