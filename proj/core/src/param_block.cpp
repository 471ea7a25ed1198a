#include "mridvr/param_block.hpp"

namespace mridvr::gpu {

namespace {

Float4 xyz(const Vec3& v, float w = 0.0f) { return {v.x, v.y, v.z, w}; }

Float4 rgb(const Rgb& c) { return {c.r, c.g, c.b, 0.0f}; }

} // namespace

ParamBlock make_param_block(const transfer::TissueWindows& tw, const transfer::RenderParams& rp,
                            const raymarch::Camera& cam, const Dims& dims, const Spacing& spacing) {
    transfer::validate(tw, rp);
    const raymarch::CameraBasis b = raymarch::camera_basis(cam);
    const raymarch::Box box = raymarch::volume_bounds(dims, spacing);

    ParamBlock p;
    p.meta = {kParamBlockVersion, rp.unmask_enabled ? kFlagUnmask : 0u,
              static_cast<std::uint32_t>(rp.curvature_mode), 0u};
    const auto& c = tw.classes;
    p.window_lo = {c[0].lo, c[1].lo, c[2].lo, c[3].lo};
    p.window_hi = {c[0].hi, c[1].hi, c[2].hi, c[3].hi};
    p.base_alpha = {c[0].base_alpha, c[1].base_alpha, c[2].base_alpha, c[3].base_alpha};
    p.multiplier = {rp.class_multiplier[0], rp.class_multiplier[1], rp.class_multiplier[2], rp.class_multiplier[3]};
    for (std::size_t i = 0; i < transfer::kClassCount; ++i) p.color[i] = rgb(c[i].color);
    p.background = rgb(rp.background);
    p.march = {rp.step_mm, rp.early_stop_alpha, rp.curvature_lambda, rp.step_mm / transfer::kStepReferenceMm};
    p.eye = xyz(b.eye, b.tan_half_fov);
    p.right = xyz(b.right, b.aspect);
    p.up = xyz(b.up);
    p.forward = xyz(b.forward);
    p.extent_mm = xyz(box.extent);
    p.spacing = {spacing.x, spacing.y, spacing.z, 0.0f};
    p.dims = {dims.x, dims.y, dims.z, 0};
    return p;
}

} // namespace mridvr::gpu
