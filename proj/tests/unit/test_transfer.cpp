#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <random>

#include "gtest_helpers.hpp"
#include "mridvr/transfer.hpp"

using namespace mridvr;
using namespace mridvr::transfer;
using test::code_of;

TEST(WindowResponse, BelowAllWindowsIsCulled) {
    const TissueWindows tw;
    const RenderParams rp;
    const WindowResponse r = window_response(0.03f, tw, rp);
    EXPECT_EQ(r.weight, 0.0f);
    EXPECT_EQ(r.tissue, -1);
}

TEST(WindowResponse, GreyMatterPeak) {
    const TissueWindows tw;
    const RenderParams rp;
    const WindowResponse r = window_response(0.167f, tw, rp);
    EXPECT_FLOAT_EQ(r.weight, 0.6f);
    EXPECT_EQ(r.color, tw[TissueClass::gm].color);
    EXPECT_EQ(r.tissue, static_cast<int>(TissueClass::gm));
}

TEST(WindowResponse, UnmaskWithZeroedClassesLeavesOnlyHigh) {
    const TissueWindows tw;
    RenderParams rp;
    rp.class_multiplier = {0.0f, 0.0f, 0.0f, 1.0f};
    rp.unmask_enabled = true;
    const WindowResponse r = window_response(0.25f, tw, rp);
    EXPECT_EQ(r.tissue, static_cast<int>(TissueClass::high));
    EXPECT_EQ(r.weight, 1.0f);
    EXPECT_EQ(r.color, tw[TissueClass::high].color);
    for (float v : {0.06f, 0.15f, 0.19f, 0.20f}) EXPECT_EQ(window_response(v, tw, rp).weight, 0.0f) << v;

    rp.unmask_enabled = false;
    EXPECT_EQ(window_response(0.25f, tw, rp).tissue, static_cast<int>(TissueClass::wm));
}

TEST(WindowResponse, PartitionBoundariesAreExact) {
    const TissueWindows tw;
    EXPECT_EQ(classify(0.05f, tw, false), 0);
    EXPECT_EQ(classify(std::nextafter(0.12f, 0.0f), tw, false), 0);
    EXPECT_EQ(classify(0.12f, tw, false), 1);
    EXPECT_EQ(classify(0.18f, tw, false), 2);
    EXPECT_EQ(classify(1.0f, tw, false), 2);
    EXPECT_EQ(classify(std::nextafter(0.05f, 0.0f), tw, false), -1);
    EXPECT_EQ(classify(0.20f, tw, true), 2);  // HIGH is open below
    EXPECT_EQ(classify(std::nextafter(0.20f, 1.0f), tw, true), 3);
}

TEST(WindowResponse, EveryIntensityMapsToAtMostOneBaseClass) {
    const TissueWindows tw;
    for (int i = 0; i <= 100000; ++i) {
        const float v = static_cast<float>(i) / 100000.0f;
        int hits = 0;
        hits += v >= tw[TissueClass::csf].lo && v < tw[TissueClass::csf].hi;
        hits += v >= tw[TissueClass::gm].lo && v < tw[TissueClass::gm].hi;
        hits += v >= tw[TissueClass::wm].lo && v <= tw[TissueClass::wm].hi;
        ASSERT_LE(hits, 1);
        const int c = classify(v, tw, false);
        ASSERT_EQ(c >= 0, hits == 1) << v;
        ASSERT_EQ(c, classify(v, tw, false));
    }
}

TEST(CurvatureWeight, Examples) {
    RenderParams rp;
    EXPECT_EQ(curvature_weight(123.0f, rp, 1.0f), 1.0f);
    rp.curvature_mode = CurvatureMode::linear;
    rp.curvature_lambda = 0.0f;
    for (float k : {-5.0f, 0.0f, 0.3f}) EXPECT_EQ(curvature_weight(k, rp, 0.7f), 1.0f);
    rp.curvature_lambda = 1.0f;
    EXPECT_EQ(curvature_weight(0.7f, rp, 0.7f), 2.0f);
    EXPECT_EQ(curvature_weight(-0.7f, rp, 0.7f), 2.0f);
    EXPECT_EQ(curvature_weight(50.0f, rp, 0.7f), 2.0f);  // clamped
    EXPECT_FLOAT_EQ(curvature_weight(0.35f, rp, 0.7f), 1.5f);
}

TEST(SampleOpacity, Examples) {
    TissueWindows tw;
    RenderParams rp;
    tw[TissueClass::gm].base_alpha = 1.0f;
    EXPECT_EQ(sample_opacity(0.15f, 2.0f, 2.0f, 0.0f, 1.0f, tw, rp).alpha, 1.0f);
    EXPECT_EQ(sample_opacity(0.15f, 0.0f, 2.0f, 0.0f, 1.0f, tw, rp).alpha, 0.0f);
    tw[TissueClass::gm].base_alpha = 0.8f;
    EXPECT_FLOAT_EQ(sample_opacity(0.15f, 1.0f, 2.0f, 0.0f, 1.0f, tw, rp).alpha, 0.4f);
    EXPECT_EQ(sample_opacity(0.15f, 1.0f, 2.0f, 0.0f, 1.0f, tw, rp).color, tw[TissueClass::gm].color);
}

TEST(SampleOpacity, RandomizedProperties) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    const TissueWindows tw;
    for (int trial = 0; trial < 20000; ++trial) {
        RenderParams rp;
        for (float& m : rp.class_multiplier) m = u(rng);
        rp.curvature_mode = trial % 2 ? CurvatureMode::linear : CurvatureMode::off;
        rp.curvature_lambda = 4.0f * u(rng);
        const float i = u(rng), gmax = 0.01f + u(rng), g = gmax * u(rng), k = 2.0f * u(rng) - 1.0f, ks = 0.01f + u(rng);

        const float a = sample_opacity(i, g, gmax, k, ks, tw, rp).alpha;
        ASSERT_GE(a, 0.0f);
        ASSERT_LE(a, 1.0f);
        ASSERT_EQ(sample_opacity(i, 0.0f, gmax, k, ks, tw, rp).alpha, 0.0f);

        const float g2 = g + (gmax - g) * u(rng);
        ASSERT_GE(sample_opacity(i, g2, gmax, k, ks, tw, rp).alpha, a);

        RenderParams more = rp;
        for (float& m : more.class_multiplier) m = m + (1.0f - m) * u(rng);
        ASSERT_GE(sample_opacity(i, g, gmax, k, ks, tw, more).alpha, a);

        RenderParams none = rp;
        none.class_multiplier = {0.0f, 0.0f, 0.0f, 0.0f};
        none.unmask_enabled = trial % 3 == 0;
        ASSERT_EQ(sample_opacity(i, g, gmax, k, ks, tw, none).alpha, 0.0f);
    }
}

TEST(Params, DefaultsAndValidation) {
    const RenderParams rp = default_render_params({0.8f, 1.0f, 1.2f});
    EXPECT_FLOAT_EQ(rp.step_mm, 0.4f);
    EXPECT_FLOAT_EQ(rp.early_stop_alpha, 0.99f);
    EXPECT_NO_THROW(validate(TissueWindows{}, rp));

    auto broken = [&](auto mutate) {
        TissueWindows tw;
        RenderParams p = rp;
        mutate(tw, p);
        return code_of([&] { validate(tw, p); });
    };
    EXPECT_EQ(broken([](TissueWindows&, RenderParams& p) { p.step_mm = 0.0f; }), ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows&, RenderParams& p) { p.early_stop_alpha = 0.0f; }), ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows&, RenderParams& p) { p.early_stop_alpha = 1.1f; }), ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows&, RenderParams& p) { p.curvature_lambda = -1.0f; }), ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows&, RenderParams& p) { p.class_multiplier[1] = 1.5f; }), ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows& tw, RenderParams&) { tw[TissueClass::wm].base_alpha = -0.1f; }),
              ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows& tw, RenderParams&) { tw[TissueClass::gm].lo = 0.10f; }),
              ErrorCode::InvalidParams);
    EXPECT_EQ(broken([](TissueWindows& tw, RenderParams&) { tw[TissueClass::csf].hi = 0.05f; }),
              ErrorCode::InvalidParams);
}

TEST(ConfigJson, RoundTrip) {
    TissueWindows tw;
    RenderParams rp;
    tw[TissueClass::csf].color = {0.1f, 0.2f, 0.3f};
    rp.class_multiplier = {0.25f, 0.5f, 0.75f, 1.0f};
    rp.curvature_mode = CurvatureMode::linear;
    rp.curvature_lambda = 0.5f;
    rp.step_mm = 0.3f;
    rp.unmask_enabled = true;
    rp.background = {0.1f, 0.1f, 0.1f};

    TissueWindows tw2;
    RenderParams rp2;
    apply_config_json(to_config_json(tw, rp), tw2, rp2);
    for (std::size_t c = 0; c < kClassCount; ++c) {
        EXPECT_EQ(tw2.classes[c].lo, tw.classes[c].lo);
        EXPECT_EQ(tw2.classes[c].hi, tw.classes[c].hi);
        EXPECT_EQ(tw2.classes[c].base_alpha, tw.classes[c].base_alpha);
        EXPECT_EQ(tw2.classes[c].color, tw.classes[c].color);
    }
    EXPECT_EQ(rp2.class_multiplier, rp.class_multiplier);
    EXPECT_EQ(rp2.curvature_mode, rp.curvature_mode);
    EXPECT_EQ(rp2.curvature_lambda, rp.curvature_lambda);
    EXPECT_EQ(rp2.step_mm, rp.step_mm);
    EXPECT_EQ(rp2.early_stop_alpha, rp.early_stop_alpha);
    EXPECT_EQ(rp2.unmask_enabled, rp.unmask_enabled);
    EXPECT_EQ(rp2.background, rp.background);

    const auto j = nlohmann::json::parse(to_config_json(tw, rp, false));
    for (const char* key : {"windows", "base_alpha", "colors", "multipliers", "curvature", "step_mm",
                            "early_stop_alpha", "unmask", "background"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
}

TEST(ConfigJson, PartialUpdateKeepsOtherFields) {
    TissueWindows tw;
    RenderParams rp;
    rp.step_mm = 0.25f;
    apply_config_json(R"({"multipliers": {"gm": 0}})", tw, rp);
    EXPECT_EQ(rp.multiplier(TissueClass::gm), 0.0f);
    EXPECT_EQ(rp.multiplier(TissueClass::wm), 1.0f);
    EXPECT_EQ(rp.step_mm, 0.25f);
}

TEST(ConfigJson, RejectsBadDocuments) {
    TissueWindows tw;
    RenderParams rp;
    EXPECT_EQ(code_of([&] { apply_config_json("{not json", tw, rp); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { apply_config_json("[1, 2]", tw, rp); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { apply_config_json(R"({"step_mm": "fast"})", tw, rp); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { apply_config_json(R"({"curvature": {"mode": "cubic"}})", tw, rp); }),
              ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { apply_config_json(R"({"multipliers": {"gm": 2}})", tw, rp); }),
              ErrorCode::InvalidParams);
}
