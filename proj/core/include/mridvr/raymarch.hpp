#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mridvr/morphology.hpp"
#include "mridvr/radiometry.hpp"
#include "mridvr/transfer.hpp"
#include "mridvr/types.hpp"
#include "mridvr/volume_io.hpp"

namespace mridvr::raymarch {

struct Camera {
    Vec3 eye;
    Vec3 target;
    Vec3 up{0.0f, 0.0f, 1.0f};
    float vfov_deg = 40.0f;
    float aspect = 1.0f;
};

// Orthonormal right-handed basis derived from a Camera. right x up = -forward.
struct CameraBasis {
    Vec3 eye;
    Vec3 right;
    Vec3 up;
    Vec3 forward;
    float tan_half_fov = 0.0f;
    float aspect = 1.0f;
};

CameraBasis camera_basis(const Camera& cam);

// Looks at the volume centre from azimuth/elevation (degrees) at the given distance (mm);
// azimuth is measured in the x-y plane from +x, elevation towards +z.
Camera orbit_camera(const Dims& dims, const Spacing& spacing, float azimuth_deg, float elevation_deg,
                    float distance_mm, float vfov_deg = 40.0f, float aspect = 1.0f);

struct Ray {
    Vec3 origin;
    Vec3 direction;
};

Ray generate_ray(const Camera& cam, std::int32_t px, std::int32_t py, std::int32_t width, std::int32_t height);
Ray generate_ray(const CameraBasis& basis, std::int32_t px, std::int32_t py, std::int32_t width,
                 std::int32_t height);

// Axis-aligned box [0, extent] in millimetres.
struct Box {
    Vec3 extent;
};

Box volume_bounds(const Dims& dims, const Spacing& spacing);

struct Span {
    float t_near = 0.0f;
    float t_far = 0.0f;
};

std::optional<Span> intersect_volume(const Ray& r, const Box& box);

// Voxel centres sit at (i + 0.5) * h. Throws OutOfBounds outside the box.
float trilinear_sample(const NormalizedVolume& nv, Vec3 pos_mm);

struct CompositeState {
    Rgb c_acc;
    float a_acc = 0.0f;
};

// Front-to-back emission-absorption update; both lines use the pre-step a_acc.
CompositeState composite_step(const CompositeState& s, const Rgb& c_sample, float alpha);

// Makes per-sample alpha independent of the marching step: 1 - (1 - alpha)^(step / 1 mm).
float correct_opacity(float alpha, float step_mm);

struct FrameBuffer {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<std::uint8_t> rgba8;  // gamma 2.2 encoded, opaque
    std::vector<float> rgba32;        // linear colour over background, alpha = a_acc

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

// Everything the renderer needs from preprocessing.
struct PreparedVolume {
    NormalizedVolume nv;
    morphology::GradientField grad;
    morphology::CurvatureField curv;
    float kappa_scale = 1.0f;
};

PreparedVolume prepare(const io::Volume& volume, unsigned workers = 0);
PreparedVolume prepare(NormalizedVolume nv, unsigned workers = 0);

std::uint8_t encode_channel(float linear);

// Deterministic: identical inputs give bit-identical buffers for any worker count.
FrameBuffer render(const PreparedVolume& pv, const transfer::TissueWindows& tw, const transfer::RenderParams& rp,
                   const Camera& cam, std::int32_t width, std::int32_t height, unsigned workers = 0);

std::vector<std::uint8_t> encode_png(const FrameBuffer& fb);
void write_png(const FrameBuffer& fb, const std::filesystem::path& path);
// Little-endian float32 RGBA rows.
void write_raw_rgba(const FrameBuffer& fb, const std::filesystem::path& path);

} // namespace mridvr::raymarch
