#include "mridvr/transfer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "mridvr/error.hpp"

namespace mridvr::transfer {

namespace {

constexpr std::array<std::string_view, kClassCount> kClassNames{"csf", "gm", "wm", "high"};

bool unit(float v) { return v >= 0.0f && v <= 1.0f; }

bool contains(TissueClass c, const ClassWindow& w, float v) {
    switch (c) {
        case TissueClass::csf:
        case TissueClass::gm:
            return v >= w.lo && v < w.hi;
        case TissueClass::wm:
            return v >= w.lo && v <= w.hi;
        case TissueClass::high:
            return v > w.lo && v <= w.hi;
    }
    return false;
}

void invalid(const std::string& what) { throw Error(ErrorCode::InvalidParams, what); }

Rgb rgb_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) invalid("colors must be [r, g, b]");
    return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

nlohmann::json rgb_to(const Rgb& c) { return {c.r, c.g, c.b}; }

} // namespace

std::string_view to_string(TissueClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

RenderParams default_render_params(const Spacing& spacing) {
    RenderParams rp;
    rp.step_mm = 0.5f * std::min({spacing.x, spacing.y, spacing.z});
    return rp;
}

void validate(const TissueWindows& tw, const RenderParams& rp) {
    for (std::size_t c = 0; c < kClassCount; ++c) {
        const ClassWindow& w = tw.classes[c];
        const std::string name(kClassNames[c]);
        if (!unit(w.lo) || !unit(w.hi) || !(w.lo < w.hi)) invalid(name + " window must satisfy 0 <= lo < hi <= 1");
        if (!unit(w.base_alpha)) invalid(name + " base_alpha outside [0, 1]");
        if (!unit(w.color.r) || !unit(w.color.g) || !unit(w.color.b)) invalid(name + " color outside [0, 1]");
        if (!unit(rp.class_multiplier[c])) invalid(name + " multiplier outside [0, 1]");
    }
    if (tw[TissueClass::csf].hi > tw[TissueClass::gm].lo || tw[TissueClass::gm].hi > tw[TissueClass::wm].lo) {
        invalid("CSF, GM and WM windows must be ordered and non-overlapping");
    }
    if (!(rp.curvature_lambda >= 0.0f)) invalid("curvature lambda must be >= 0");
    if (!(rp.step_mm > 0.0f) || !std::isfinite(rp.step_mm)) invalid("step_mm must be > 0");
    if (!(rp.early_stop_alpha > 0.0f && rp.early_stop_alpha <= 1.0f)) invalid("early_stop_alpha must be in (0, 1]");
    if (!unit(rp.background.r) || !unit(rp.background.g) || !unit(rp.background.b)) {
        invalid("background outside [0, 1]");
    }
}

int classify(float i_norm, const TissueWindows& tw, bool unmask_enabled) {
    if (unmask_enabled && contains(TissueClass::high, tw[TissueClass::high], i_norm)) {
        return static_cast<int>(TissueClass::high);
    }
    for (TissueClass c : {TissueClass::csf, TissueClass::gm, TissueClass::wm}) {
        if (contains(c, tw[c], i_norm)) return static_cast<int>(c);
    }
    return -1;
}

WindowResponse window_response(float i_norm, const TissueWindows& tw, const RenderParams& rp) {
    const int tissue = classify(i_norm, tw, rp.unmask_enabled);
    if (tissue < 0) return {};
    const auto c = static_cast<TissueClass>(tissue);
    return {tw[c].base_alpha * rp.multiplier(c), tw[c].color, tissue};
}

float curvature_weight(float kappa, const RenderParams& rp, float kappa_scale) {
    if (rp.curvature_mode == CurvatureMode::off) return 1.0f;
    const float w = 1.0f + rp.curvature_lambda * std::fabs(kappa) / kappa_scale;
    return std::clamp(w, 0.0f, 2.0f);
}

SampleOpacity sample_opacity(float i_norm, float grad_mag, float grad_max, float kappa, float kappa_scale,
                             const TissueWindows& tw, const RenderParams& rp) {
    const WindowResponse wr = window_response(i_norm, tw, rp);
    if (wr.tissue < 0) return {};
    const float ratio = grad_max > 0.0f ? grad_mag / grad_max : 0.0f;
    const float alpha = wr.weight * ratio * curvature_weight(kappa, rp, kappa_scale);
    return {std::clamp(alpha, 0.0f, 1.0f), wr.color};
}

void apply_config_json(std::string_view text, TissueWindows& tw, RenderParams& rp) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        invalid(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) invalid("config must be a JSON object");

    try {
        for (std::size_t c = 0; c < kClassCount; ++c) {
            const std::string name(kClassNames[c]);
            if (j.contains("windows") && j["windows"].contains(name)) {
                const auto& w = j["windows"][name];
                if (!w.is_array() || w.size() != 2) invalid("windows." + name + " must be [lo, hi]");
                tw.classes[c].lo = w[0].get<float>();
                tw.classes[c].hi = w[1].get<float>();
            }
            if (j.contains("base_alpha") && j["base_alpha"].contains(name)) {
                tw.classes[c].base_alpha = j["base_alpha"][name].get<float>();
            }
            if (j.contains("colors") && j["colors"].contains(name)) tw.classes[c].color = rgb_from(j["colors"][name]);
            if (j.contains("multipliers") && j["multipliers"].contains(name)) {
                rp.class_multiplier[c] = j["multipliers"][name].get<float>();
            }
        }
        if (j.contains("curvature")) {
            const auto& cv = j["curvature"];
            if (cv.contains("mode")) {
                const auto mode = cv["mode"].get<std::string>();
                if (mode == "off") {
                    rp.curvature_mode = CurvatureMode::off;
                } else if (mode == "linear") {
                    rp.curvature_mode = CurvatureMode::linear;
                } else {
                    invalid("curvature.mode must be \"off\" or \"linear\"");
                }
            }
            if (cv.contains("lambda")) rp.curvature_lambda = cv["lambda"].get<float>();
        }
        if (j.contains("step_mm")) rp.step_mm = j["step_mm"].get<float>();
        if (j.contains("early_stop_alpha")) rp.early_stop_alpha = j["early_stop_alpha"].get<float>();
        if (j.contains("unmask")) rp.unmask_enabled = j["unmask"].get<bool>();
        if (j.contains("background")) rp.background = rgb_from(j["background"]);
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("config has a wrongly typed field: ") + e.what());
    }
    validate(tw, rp);
}

std::string to_config_json(const TissueWindows& tw, const RenderParams& rp, bool pretty) {
    nlohmann::json j;
    for (std::size_t c = 0; c < kClassCount; ++c) {
        const std::string name(kClassNames[c]);
        j["windows"][name] = {tw.classes[c].lo, tw.classes[c].hi};
        j["base_alpha"][name] = tw.classes[c].base_alpha;
        j["colors"][name] = rgb_to(tw.classes[c].color);
        j["multipliers"][name] = rp.class_multiplier[c];
    }
    j["curvature"] = {{"mode", rp.curvature_mode == CurvatureMode::off ? "off" : "linear"},
                      {"lambda", rp.curvature_lambda}};
    j["step_mm"] = rp.step_mm;
    j["early_stop_alpha"] = rp.early_stop_alpha;
    j["unmask"] = rp.unmask_enabled;
    j["background"] = rgb_to(rp.background);
    return j.dump(pretty ? 2 : -1);
}

} // namespace mridvr::transfer
