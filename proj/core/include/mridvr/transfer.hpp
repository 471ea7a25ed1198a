#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "mridvr/types.hpp"

namespace mridvr::transfer {

enum class TissueClass : std::size_t { csf = 0, gm = 1, wm = 2, high = 3 };
constexpr std::size_t kClassCount = 4;

std::string_view to_string(TissueClass c);

struct ClassWindow {
    float lo = 0.0f;
    float hi = 0.0f;
    float base_alpha = 0.0f;
    Rgb color;
};

// CSF/GM/WM are half-open [lo, hi) except WM, which is closed at its upper edge. HIGH is the
// open-below band (lo, hi] used for unmasking and may overlap WM.
struct TissueWindows {
    std::array<ClassWindow, kClassCount> classes{{
        {0.05f, 0.12f, 0.35f, {0.2f, 0.4f, 0.9f}},
        {0.12f, 0.18f, 0.60f, {0.75f, 0.7f, 0.65f}},
        {0.18f, 1.00f, 0.85f, {0.95f, 0.95f, 0.9f}},
        {0.20f, 1.00f, 1.00f, {0.9f, 0.2f, 0.2f}},
    }};

    const ClassWindow& operator[](TissueClass c) const { return classes[static_cast<std::size_t>(c)]; }
    ClassWindow& operator[](TissueClass c) { return classes[static_cast<std::size_t>(c)]; }
};

enum class CurvatureMode { off = 0, linear = 1 };

struct RenderParams {
    std::array<float, kClassCount> class_multiplier{1.0f, 1.0f, 1.0f, 1.0f};
    CurvatureMode curvature_mode = CurvatureMode::off;
    float curvature_lambda = 0.0f;
    float step_mm = 0.5f;
    float early_stop_alpha = 0.99f;
    Rgb background{0.0f, 0.0f, 0.0f};
    bool unmask_enabled = false;

    float multiplier(TissueClass c) const { return class_multiplier[static_cast<std::size_t>(c)]; }
};

// Reference step for opacity correction: alpha is defined per millimetre of travel.
constexpr float kStepReferenceMm = 1.0f;

// Defaults with step_mm set to half of the smallest voxel spacing.
RenderParams default_render_params(const Spacing& spacing);

// Throws InvalidParams when an invariant is violated.
void validate(const TissueWindows& tw, const RenderParams& rp);

struct WindowResponse {
    float weight = 0.0f;
    Rgb color;
    int tissue = -1;  // index of the contributing class, -1 when culled
};

// Base class lookup; the HIGH band replaces WM when unmasking is enabled.
int classify(float i_norm, const TissueWindows& tw, bool unmask_enabled);

WindowResponse window_response(float i_norm, const TissueWindows& tw, const RenderParams& rp);

float curvature_weight(float kappa, const RenderParams& rp, float kappa_scale);

struct SampleOpacity {
    float alpha = 0.0f;
    Rgb color;
};

SampleOpacity sample_opacity(float i_norm, float grad_mag, float grad_max, float kappa, float kappa_scale,
                             const TissueWindows& tw, const RenderParams& rp);

// JSON config document shared with the viewer. Keys: windows, base_alpha, colors, multipliers,
// curvature {mode, lambda}, step_mm, early_stop_alpha, unmask, background. Missing keys keep
// the values already in tw/rp.
void apply_config_json(std::string_view text, TissueWindows& tw, RenderParams& rp);
std::string to_config_json(const TissueWindows& tw, const RenderParams& rp, bool pretty = true);

} // namespace mridvr::transfer
