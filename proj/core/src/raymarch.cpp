#include "mridvr/raymarch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mridvr/error.hpp"
#include "mridvr/parallel.hpp"

namespace mridvr::raymarch {

namespace {

constexpr float kInvGamma = 1.0f / 2.2f;

float clamp_index_coord(float u, std::int32_t n) { return std::clamp(u, 0.0f, static_cast<float>(n - 1)); }

// Interpolation on positions already clamped to the box; the GPU kernel mirrors this exactly.
float trilinear_clamped(const NormalizedVolume& nv, Vec3 p) {
    const Dims& d = nv.dims;
    const float u = clamp_index_coord(p.x / nv.spacing.x - 0.5f, d.x);
    const float v = clamp_index_coord(p.y / nv.spacing.y - 0.5f, d.y);
    const float w = clamp_index_coord(p.z / nv.spacing.z - 0.5f, d.z);
    const std::int32_t i0 = std::min(static_cast<std::int32_t>(std::floor(u)), d.x - 2);
    const std::int32_t j0 = std::min(static_cast<std::int32_t>(std::floor(v)), d.y - 2);
    const std::int32_t k0 = std::min(static_cast<std::int32_t>(std::floor(w)), d.z - 2);
    const float fx = u - static_cast<float>(i0);
    const float fy = v - static_cast<float>(j0);
    const float fz = w - static_cast<float>(k0);

    const float c000 = nv.at(i0, j0, k0);
    const float c100 = nv.at(i0 + 1, j0, k0);
    const float c010 = nv.at(i0, j0 + 1, k0);
    const float c110 = nv.at(i0 + 1, j0 + 1, k0);
    const float c001 = nv.at(i0, j0, k0 + 1);
    const float c101 = nv.at(i0 + 1, j0, k0 + 1);
    const float c011 = nv.at(i0, j0 + 1, k0 + 1);
    const float c111 = nv.at(i0 + 1, j0 + 1, k0 + 1);

    const float c00 = c000 + (c100 - c000) * fx;
    const float c10 = c010 + (c110 - c010) * fx;
    const float c01 = c001 + (c101 - c001) * fx;
    const float c11 = c011 + (c111 - c011) * fx;
    const float c0 = c00 + (c10 - c00) * fy;
    const float c1 = c01 + (c11 - c01) * fy;
    return c0 + (c1 - c0) * fz;
}

std::int32_t nearest(float p, float h, std::int32_t n) {
    return std::clamp(static_cast<std::int32_t>(std::floor(p / h)), 0, n - 1);
}

Rgb shade_ray(const PreparedVolume& pv, const transfer::TissueWindows& tw, const transfer::RenderParams& rp,
              const Box& box, const Ray& ray, float& a_out) {
    CompositeState s;
    const auto span = intersect_volume(ray, box);
    if (span) {
        const Dims& d = pv.nv.dims;
        const Spacing& h = pv.nv.spacing;
        const float step = rp.step_mm;
        const float grad_max = pv.grad.grad_max;
        for (std::int32_t k = 0;; ++k) {
            const float t = span->t_near + (static_cast<float>(k) + 0.5f) * step;
            if (!(t < span->t_far)) break;
            Vec3 p = ray.origin + ray.direction * t;
            p.x = std::clamp(p.x, 0.0f, box.extent.x);
            p.y = std::clamp(p.y, 0.0f, box.extent.y);
            p.z = std::clamp(p.z, 0.0f, box.extent.z);

            const float intensity = trilinear_clamped(pv.nv, p);
            const std::size_t idx =
                linear_index(d, nearest(p.x, h.x, d.x), nearest(p.y, h.y, d.y), nearest(p.z, h.z, d.z));
            const auto sample = transfer::sample_opacity(intensity, pv.grad.magnitudes[idx], grad_max,
                                                         pv.curv.kappa[idx], pv.kappa_scale, tw, rp);
            if (sample.alpha > 0.0f) {
                s = composite_step(s, sample.color, correct_opacity(sample.alpha, step));
                if (s.a_acc >= rp.early_stop_alpha) break;
            }
        }
    }
    a_out = s.a_acc;
    const float rest = 1.0f - s.a_acc;
    return {s.c_acc.r + rest * rp.background.r, s.c_acc.g + rest * rp.background.g,
            s.c_acc.b + rest * rp.background.b};
}

} // namespace

CameraBasis camera_basis(const Camera& cam) {
    const Vec3 view = cam.target - cam.eye;
    if (length(view) <= 0.0f) throw Error(ErrorCode::DegenerateCamera, "eye coincides with target");
    if (!(cam.vfov_deg > 0.0f && cam.vfov_deg < 180.0f)) {
        throw Error(ErrorCode::DegenerateCamera, "vertical field of view must be in (0, 180)");
    }
    if (!(cam.aspect > 0.0f)) throw Error(ErrorCode::DegenerateCamera, "aspect must be positive");
    const Vec3 forward = normalize(view);
    const Vec3 side = cross(forward, cam.up);
    if (length(side) < 1e-6f * std::max(1.0f, length(cam.up))) {
        throw Error(ErrorCode::DegenerateCamera, "up vector is parallel to the view axis");
    }
    CameraBasis b;
    b.eye = cam.eye;
    b.forward = forward;
    b.right = normalize(side);
    b.up = cross(b.right, forward);
    b.tan_half_fov = static_cast<float>(std::tan(static_cast<double>(cam.vfov_deg) * std::numbers::pi / 360.0));
    b.aspect = cam.aspect;
    return b;
}

Camera orbit_camera(const Dims& dims, const Spacing& spacing, float azimuth_deg, float elevation_deg,
                    float distance_mm, float vfov_deg, float aspect) {
    const double az = static_cast<double>(azimuth_deg) * std::numbers::pi / 180.0;
    const double el = std::clamp(static_cast<double>(elevation_deg), -89.9, 89.9) * std::numbers::pi / 180.0;
    const Box box = volume_bounds(dims, spacing);
    const Vec3 center = box.extent * 0.5f;
    const Vec3 dir{static_cast<float>(std::cos(el) * std::cos(az)), static_cast<float>(std::cos(el) * std::sin(az)),
                   static_cast<float>(std::sin(el))};
    Camera cam;
    cam.eye = center + dir * distance_mm;
    cam.target = center;
    cam.up = {0.0f, 0.0f, 1.0f};
    cam.vfov_deg = vfov_deg;
    cam.aspect = aspect;
    return cam;
}

Ray generate_ray(const CameraBasis& b, std::int32_t px, std::int32_t py, std::int32_t width, std::int32_t height) {
    const float sx = ((2.0f * (static_cast<float>(px) + 0.5f)) / static_cast<float>(width) - 1.0f) *
                     b.tan_half_fov * b.aspect;
    const float sy =
        (1.0f - (2.0f * (static_cast<float>(py) + 0.5f)) / static_cast<float>(height)) * b.tan_half_fov;
    const Vec3 d = (b.forward + b.right * sx) + b.up * sy;
    const float len = std::sqrt(dot(d, d));
    return {b.eye, {d.x / len, d.y / len, d.z / len}};
}

Ray generate_ray(const Camera& cam, std::int32_t px, std::int32_t py, std::int32_t width, std::int32_t height) {
    if (px < 0 || py < 0 || px >= width || py >= height) {
        throw Error(ErrorCode::InvalidParams, "pixel outside the image");
    }
    return generate_ray(camera_basis(cam), px, py, width, height);
}

Box volume_bounds(const Dims& dims, const Spacing& spacing) {
    return {{static_cast<float>(dims.x) * spacing.x, static_cast<float>(dims.y) * spacing.y,
             static_cast<float>(dims.z) * spacing.z}};
}

std::optional<Span> intersect_volume(const Ray& r, const Box& box) {
    float t_min = -std::numeric_limits<float>::infinity();
    float t_max = std::numeric_limits<float>::infinity();
    for (int a = 0; a < 3; ++a) {
        const float o = r.origin[a];
        const float d = r.direction[a];
        const float hi = box.extent[a];
        if (d == 0.0f) {
            if (o < 0.0f || o > hi) return std::nullopt;
            continue;
        }
        const float t1 = (0.0f - o) / d;
        const float t2 = (hi - o) / d;
        t_min = std::max(t_min, std::min(t1, t2));
        t_max = std::min(t_max, std::max(t1, t2));
    }
    const float t_near = std::max(t_min, 0.0f);
    if (t_max < t_near) return std::nullopt;
    return Span{t_near, t_max};
}

float trilinear_sample(const NormalizedVolume& nv, Vec3 pos_mm) {
    const Box box = volume_bounds(nv.dims, nv.spacing);
    for (int a = 0; a < 3; ++a) {
        if (!(pos_mm[a] >= 0.0f && pos_mm[a] <= box.extent[a])) {
            throw Error(ErrorCode::OutOfBounds, "sample position outside the volume");
        }
    }
    if (nv.dims.x < 2 || nv.dims.y < 2 || nv.dims.z < 2) {
        throw Error(ErrorCode::VolumeTooSmall, "trilinear sampling needs 2 voxels per axis");
    }
    return trilinear_clamped(nv, pos_mm);
}

CompositeState composite_step(const CompositeState& s, const Rgb& c, float alpha) {
    const float rest = 1.0f - s.a_acc;
    CompositeState out;
    out.c_acc = {s.c_acc.r + rest * c.r * alpha, s.c_acc.g + rest * c.g * alpha, s.c_acc.b + rest * c.b * alpha};
    out.a_acc = s.a_acc + rest * alpha;
    return out;
}

float correct_opacity(float alpha, float step_mm) {
    const float exponent = step_mm / transfer::kStepReferenceMm;
    if (exponent == 1.0f) return alpha;
    return 1.0f - std::pow(1.0f - alpha, exponent);
}

PreparedVolume prepare(NormalizedVolume nv, unsigned workers) {
    PreparedVolume pv;
    pv.grad = morphology::gradient_field(nv, workers);
    pv.curv = morphology::directional_curvature(nv, pv.grad, workers);
    pv.kappa_scale = morphology::kappa_scale(nv, pv.curv);
    pv.nv = std::move(nv);
    return pv;
}

PreparedVolume prepare(const io::Volume& volume, unsigned workers) {
    return prepare(radiometry::normalize(volume), workers);
}

std::uint8_t encode_channel(float linear) {
    const float v = std::clamp(linear, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::pow(v, kInvGamma) * 255.0f + 0.5f);
}

FrameBuffer render(const PreparedVolume& pv, const transfer::TissueWindows& tw, const transfer::RenderParams& rp,
                   const Camera& cam, std::int32_t width, std::int32_t height, unsigned workers) {
    const std::size_t n = pv.nv.dims.voxel_count();
    if (pv.nv.values.size() != n || pv.grad.dims != pv.nv.dims || pv.curv.dims != pv.nv.dims ||
        pv.grad.magnitudes.size() != n || pv.curv.kappa.size() != n) {
        throw Error(ErrorCode::PreprocessMismatch, "morphology fields do not match the volume grid");
    }
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidParams, "image size must be positive");
    transfer::validate(tw, rp);
    const CameraBasis basis = camera_basis(cam);
    const Box box = volume_bounds(pv.nv.dims, pv.nv.spacing);

    FrameBuffer fb;
    fb.width = width;
    fb.height = height;
    fb.rgba8.resize(fb.pixel_count() * 4);
    fb.rgba32.resize(fb.pixel_count() * 4);

    parallel_chunks(static_cast<std::size_t>(height), workers, [&](std::size_t y0, std::size_t y1, unsigned) {
        for (auto py = static_cast<std::int32_t>(y0); py < static_cast<std::int32_t>(y1); ++py) {
            for (std::int32_t px = 0; px < width; ++px) {
                float a = 0.0f;
                const Rgb c = shade_ray(pv, tw, rp, box, generate_ray(basis, px, py, width, height), a);
                const std::size_t o = (static_cast<std::size_t>(py) * static_cast<std::size_t>(width) +
                                       static_cast<std::size_t>(px)) * 4;
                fb.rgba32[o + 0] = c.r;
                fb.rgba32[o + 1] = c.g;
                fb.rgba32[o + 2] = c.b;
                fb.rgba32[o + 3] = a;
                fb.rgba8[o + 0] = encode_channel(c.r);
                fb.rgba8[o + 1] = encode_channel(c.g);
                fb.rgba8[o + 2] = encode_channel(c.b);
                fb.rgba8[o + 3] = 255;
            }
        }
    });
    return fb;
}

} // namespace mridvr::raymarch
