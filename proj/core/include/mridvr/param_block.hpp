#pragma once

#include <cstddef>
#include <cstdint>

#include "mridvr/raymarch.hpp"
#include "mridvr/transfer.hpp"

namespace mridvr::gpu {

// Uniform parameter block consumed by the raymarch kernel (kernels/common.cl declares the same
// struct). Every member is a 16-byte vector so std140 and OpenCL layouts agree. Bump
// kParamBlockVersion whenever a field moves.
//
//   offset  field        contents
//        0  meta         version, flags (bit 0 = unmask), curvature mode, reserved
//       16  window_lo    csf, gm, wm, high
//       32  window_hi    csf, gm, wm, high
//       48  base_alpha   csf, gm, wm, high
//       64  multiplier   csf, gm, wm, high
//       80  color[4]     rgb + 0, in class order
//      144  background   rgb + 0
//      160  reserved[3]  zero
//      208  march        step_mm, early_stop_alpha, curvature_lambda, opacity exponent
//      224  eye          xyz + tan(vfov / 2)
//      240  right        xyz + aspect
//      256  up           xyz + 0
//      272  forward      xyz + 0
//      288  extent_mm    xyz + 0
//      304  spacing      xyz + 0
//      320  dims         x, y, z, 0
constexpr std::uint32_t kParamBlockVersion = 1;

struct alignas(16) Float4 {
    float x = 0.0f, y = 0.0f, z = 0.0f, w = 0.0f;
};

struct alignas(16) UInt4 {
    std::uint32_t x = 0, y = 0, z = 0, w = 0;
};

struct alignas(16) Int4 {
    std::int32_t x = 0, y = 0, z = 0, w = 0;
};

struct ParamBlock {
    UInt4 meta;
    Float4 window_lo;
    Float4 window_hi;
    Float4 base_alpha;
    Float4 multiplier;
    Float4 color[4];
    Float4 background;
    Float4 reserved[3];
    Float4 march;
    Float4 eye;
    Float4 right;
    Float4 up;
    Float4 forward;
    Float4 extent_mm;
    Float4 spacing;
    Int4 dims;
};

static_assert(sizeof(ParamBlock) == 336);
static_assert(offsetof(ParamBlock, color) == 80);
static_assert(offsetof(ParamBlock, background) == 144);
static_assert(offsetof(ParamBlock, march) == 208);
static_assert(offsetof(ParamBlock, eye) == 224);
static_assert(offsetof(ParamBlock, dims) == 320);

constexpr std::uint32_t kFlagUnmask = 1u;

ParamBlock make_param_block(const transfer::TissueWindows& tw, const transfer::RenderParams& rp,
                            const raymarch::Camera& cam, const Dims& dims, const Spacing& spacing);

} // namespace mridvr::gpu
