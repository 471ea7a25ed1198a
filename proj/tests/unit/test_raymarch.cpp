#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "gtest_helpers.hpp"
#include "mridvr/phantom.hpp"
#include "mridvr/raymarch.hpp"
#include "test_support.hpp"

using namespace mridvr;
using namespace mridvr::raymarch;
using test::code_of;

namespace {

Camera looking_down_x() {
    Camera cam;
    cam.eye = {-10.0f, 0.0f, 0.0f};
    cam.target = {0.0f, 0.0f, 0.0f};
    cam.up = {0.0f, 0.0f, 1.0f};
    return cam;
}

double mean_channel(const FrameBuffer& fb) {
    double s = 0.0;
    for (std::size_t i = 0; i < fb.rgba32.size(); ++i)
        if (i % 4 != 3) s += fb.rgba32[i];
    return s / (3.0 * static_cast<double>(fb.pixel_count()));
}

} // namespace

TEST(Camera, CentrePixelLooksAtTarget) {
    Camera cam;
    cam.eye = {3.0f, -40.0f, 17.0f};
    cam.target = {64.0f, 60.0f, 70.0f};
    const Ray r = generate_ray(cam, 50, 50, 101, 101);
    const Vec3 want = normalize(cam.target - cam.eye);
    EXPECT_NEAR(r.direction.x, want.x, 1e-6f);
    EXPECT_NEAR(r.direction.y, want.y, 1e-6f);
    EXPECT_NEAR(r.direction.z, want.z, 1e-6f);
    EXPECT_EQ(r.origin.x, cam.eye.x);
}

TEST(Camera, NinetyDegreeCornersAt45Degrees) {
    Camera cam = looking_down_x();
    cam.vfov_deg = 90.0f;
    for (std::int32_t n : {2, 64, 100001}) {
        for (auto [px, py] : {std::pair{0, 0}, std::pair{n - 1, 0}, std::pair{0, n - 1}, std::pair{n - 1, n - 1}}) {
            const Ray r = generate_ray(cam, px, py, n, n);
            const double vertical = std::atan2(std::abs(r.direction.z), r.direction.x);
            // Pixel centres sit half a pixel inside the frustum edge.
            EXPECT_NEAR(vertical, std::atan(1.0 - 1.0 / n), 1e-6);
        }
    }
    const Ray top = generate_ray(cam, 0, 0, 100001, 100001);
    EXPECT_NEAR(std::atan2(top.direction.z, top.direction.x), std::numbers::pi / 4, 1e-4);
    EXPECT_GT(top.direction.z, 0.0f);  // row 0 is the top of the image
    EXPECT_GT(top.direction.y, 0.0f);  // column 0 is on the left: right = forward x up = -y here
}

TEST(Camera, DirectionsAreUnitAndBasisOrthonormal) {
    Camera cam;
    cam.eye = {200.0f, 150.0f, 90.0f};
    cam.target = {64.0f, 64.0f, 64.0f};
    cam.aspect = 1.5f;
    const CameraBasis b = camera_basis(cam);
    EXPECT_NEAR(dot(b.right, b.up), 0.0f, 1e-6f);
    EXPECT_NEAR(dot(b.right, b.forward), 0.0f, 1e-6f);
    EXPECT_NEAR(dot(b.up, b.forward), 0.0f, 1e-6f);
    const Vec3 rxu = cross(b.right, b.up);
    EXPECT_NEAR(rxu.x, -b.forward.x, 1e-6f);
    EXPECT_NEAR(rxu.y, -b.forward.y, 1e-6f);
    EXPECT_NEAR(rxu.z, -b.forward.z, 1e-6f);
    for (std::int32_t py = 0; py < 30; py += 7)
        for (std::int32_t px = 0; px < 45; px += 4) EXPECT_NEAR(length(generate_ray(b, px, py, 45, 30).direction), 1.0f, 1e-6f);
}

TEST(Camera, DegenerateConfigurations) {
    Camera cam = looking_down_x();
    cam.up = {1.0f, 0.0f, 0.0f};
    EXPECT_EQ(code_of([&] { camera_basis(cam); }), ErrorCode::DegenerateCamera);
    cam = looking_down_x();
    cam.target = cam.eye;
    EXPECT_EQ(code_of([&] { camera_basis(cam); }), ErrorCode::DegenerateCamera);
    cam = looking_down_x();
    cam.vfov_deg = 180.0f;
    EXPECT_EQ(code_of([&] { camera_basis(cam); }), ErrorCode::DegenerateCamera);
}

TEST(Camera, OrbitLooksAtCentreFromDistance) {
    const Camera cam = orbit_camera({100, 80, 60}, {1.0f, 1.0f, 2.0f}, 90.0f, 0.0f, 250.0f);
    EXPECT_FLOAT_EQ(cam.target.x, 50.0f);
    EXPECT_FLOAT_EQ(cam.target.y, 40.0f);
    EXPECT_FLOAT_EQ(cam.target.z, 60.0f);
    EXPECT_NEAR(cam.eye.x, 50.0f, 1e-4f);
    EXPECT_NEAR(cam.eye.y, 290.0f, 1e-4f);
    EXPECT_NEAR(length(cam.eye - cam.target), 250.0f, 1e-3f);
}

TEST(Intersect, SlabCases) {
    const Box box{{10.0f, 20.0f, 30.0f}};
    const auto hit = intersect_volume({{-5.0f, 10.0f, 15.0f}, {1.0f, 0.0f, 0.0f}}, box);
    ASSERT_TRUE(hit);
    EXPECT_FLOAT_EQ(hit->t_near, 5.0f);
    EXPECT_FLOAT_EQ(hit->t_far, 15.0f);

    EXPECT_FALSE(intersect_volume({{-5.0f, 25.0f, 15.0f}, {1.0f, 0.0f, 0.0f}}, box));  // parallel, outside
    EXPECT_FALSE(intersect_volume({{-5.0f, 10.0f, 15.0f}, {-1.0f, 0.0f, 0.0f}}, box));  // pointing away

    const auto inside = intersect_volume({{5.0f, 10.0f, 15.0f}, {0.0f, 0.0f, 1.0f}}, box);
    ASSERT_TRUE(inside);
    EXPECT_EQ(inside->t_near, 0.0f);
    EXPECT_FLOAT_EQ(inside->t_far, 15.0f);

    const Vec3 d = normalize(Vec3{1.0f, 1.0f, 1.0f});
    const auto diag = intersect_volume({{-1.0f, -1.0f, -1.0f}, d}, Box{{2.0f, 2.0f, 2.0f}});
    ASSERT_TRUE(diag);
    EXPECT_NEAR(diag->t_near, std::sqrt(3.0f), 1e-5f);
    EXPECT_NEAR(diag->t_far, 3.0f * std::sqrt(3.0f), 1e-5f);
}

TEST(Trilinear, Examples) {
    NormalizedVolume nv = test::field({4, 4, 4}, {2.0f, 1.0f, 1.0f}, [](double x, double y, double z) {
        return 0.01 * x + 0.02 * y + 0.03 * z + 0.1;
    });
    nv.values[linear_index(nv.dims, 1, 2, 3)] = 0.9f;
    EXPECT_EQ(trilinear_sample(nv, {3.0f, 2.5f, 3.5f}), 0.9f);  // centre of voxel (1, 2, 3)
    const float a = nv.at(1, 1, 1), b = nv.at(2, 1, 1);
    EXPECT_FLOAT_EQ(trilinear_sample(nv, {4.0f, 1.5f, 1.5f}), 0.5f * (a + b));

    // Field sampled at voxel index i is c * i * h; at position p (mm) that is c * (p - h/2).
    nv = test::field({6, 6, 6}, {2.0f, 1.0f, 1.0f}, [](double x, double y, double z) { return 0.01 * x + 0.02 * y + 0.03 * z; });
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int n = 0; n < 500; ++n) {
        const Vec3 p{1.0f + 10.0f * u(rng), 0.5f + 5.0f * u(rng), 0.5f + 5.0f * u(rng)};
        const double want = 0.01 * (p.x - 1.0) + 0.02 * (p.y - 0.5) + 0.03 * (p.z - 0.5);
        ASSERT_NEAR(trilinear_sample(nv, p), want, 1e-6);
    }
    EXPECT_EQ(code_of([&] { trilinear_sample(nv, {-0.1f, 1.0f, 1.0f}); }), ErrorCode::OutOfBounds);
    EXPECT_EQ(code_of([&] { trilinear_sample(nv, {1.0f, 1.0f, 6.01f}); }), ErrorCode::OutOfBounds);
}

TEST(Composite, Examples) {
    CompositeState s = composite_step({}, {1.0f, 0.0f, 0.0f}, 1.0f);
    EXPECT_EQ(s.c_acc, (Rgb{1.0f, 0.0f, 0.0f}));
    EXPECT_EQ(s.a_acc, 1.0f);

    const CompositeState before{{0.2f, 0.3f, 0.4f}, 0.5f};
    const CompositeState same = composite_step(before, {0.9f, 0.9f, 0.9f}, 0.0f);
    EXPECT_EQ(same.c_acc, before.c_acc);
    EXPECT_EQ(same.a_acc, before.a_acc);

    s = composite_step(composite_step({}, {1, 1, 1}, 0.5f), {1, 1, 1}, 0.5f);
    EXPECT_EQ(s.a_acc, 0.75f);
    EXPECT_EQ(s.c_acc, (Rgb{0.75f, 0.75f, 0.75f}));
}

TEST(Composite, ClosedFormForIdenticalSamples) {
    for (float alpha : {0.1f, 0.03f, 0.5f, 0.97f}) {
        for (int n : {1, 10, 50, 200}) {
            CompositeState s;
            for (int i = 0; i < n; ++i) s = composite_step(s, {1, 1, 1}, alpha);
            EXPECT_NEAR(s.a_acc, 1.0 - std::pow(1.0 - alpha, n), 1e-6) << alpha << " x" << n;
        }
    }
}

TEST(Composite, RandomSequencesStayBoundedAndMonotone) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int trial = 0; trial < 1000; ++trial) {
        CompositeState s;
        const int n = 1 + static_cast<int>(rng() % 300);
        for (int i = 0; i < n; ++i) {
            const float a = u(rng) < 0.2f ? 0.0f : u(rng);
            const CompositeState next = composite_step(s, {u(rng), u(rng), u(rng)}, a);
            ASSERT_GE(next.a_acc, s.a_acc);
            ASSERT_LE(next.a_acc, 1.0f);
            ASSERT_LE(next.c_acc.r, 1.0f);
            ASSERT_LE(next.c_acc.g, 1.0f);
            ASSERT_LE(next.c_acc.b, 1.0f);
            s = next;
        }
    }
}

TEST(Composite, OpacityCorrection) {
    EXPECT_EQ(correct_opacity(0.3f, 1.0f), 0.3f);
    EXPECT_NEAR(correct_opacity(0.75f, 0.5f), 0.5f, 1e-6f);
    // Two half-length steps absorb as much as one full step.
    const float half = correct_opacity(0.4f, 0.5f);
    CompositeState s = composite_step(composite_step({}, {1, 1, 1}, half), {1, 1, 1}, half);
    EXPECT_NEAR(s.a_acc, 0.4f, 1e-6f);
    EXPECT_EQ(correct_opacity(0.0f, 0.25f), 0.0f);
}

TEST(Encode, GammaEndpoints) {
    EXPECT_EQ(encode_channel(0.0f), 0);
    EXPECT_EQ(encode_channel(1.0f), 255);
    EXPECT_EQ(encode_channel(2.0f), 255);
    EXPECT_EQ(encode_channel(0.5f), 186);  // 0.5^(1/2.2) * 255 = 186.1
}

TEST(Render, BelowWindowVolumeIsAllBackground) {
    NormalizedVolume nv = test::smooth_random_field({24, 24, 24}, {1, 1, 1}, 5);
    for (float& v : nv.values) v *= 0.08f;  // max 0.08 * ~0.9, below CSF after scaling
    for (float& v : nv.values) v = std::min(v, 0.049f);
    const PreparedVolume pv = prepare(std::move(nv));
    transfer::RenderParams rp = transfer::default_render_params({1, 1, 1});
    rp.background = {0.2f, 0.4f, 0.6f};
    const FrameBuffer fb = render(pv, {}, rp, orbit_camera(pv.nv.dims, pv.nv.spacing, 30, 20, 80), 48, 40);
    ASSERT_EQ(fb.rgba8.size(), 48u * 40u * 4u);
    for (std::size_t p = 0; p < fb.pixel_count(); ++p) {
        ASSERT_EQ(fb.rgba8[4 * p + 0], encode_channel(0.2f));
        ASSERT_EQ(fb.rgba8[4 * p + 1], encode_channel(0.4f));
        ASSERT_EQ(fb.rgba8[4 * p + 2], encode_channel(0.6f));
        ASSERT_EQ(fb.rgba8[4 * p + 3], 255);
        ASSERT_EQ(fb.rgba32[4 * p + 3], 0.0f);
    }
}

TEST(Render, SphereSilhouetteMatchesProjectedDisc) {
    const std::int32_t n = 128, size = 256;
    const double radius = 48.0, distance = 300.0, vfov = 40.0;
    // 0.1 sits in the CSF window and its lower edge (0.05) is the midpoint of the jump.
    const PreparedVolume pv = prepare(test::sphere_field(n, radius, 0.1f));
    const transfer::RenderParams rp = transfer::default_render_params({1, 1, 1});
    const Camera cam = orbit_camera(pv.nv.dims, pv.nv.spacing, 25.0f, 15.0f, static_cast<float>(distance),
                                    static_cast<float>(vfov));
    const FrameBuffer fb = render(pv, {}, rp, cam, size, size);

    const double half_angle = std::asin(radius / distance);
    const double disc_px = std::tan(half_angle) / std::tan(vfov * std::numbers::pi / 360.0) * size / 2.0;
    const double expected = std::numbers::pi * disc_px * disc_px / (size * size);
    const double got = static_cast<double>(test::non_background_pixels(fb)) / (size * size);
    EXPECT_NEAR(got / expected, 1.0, 0.02) << "got " << got << " expected " << expected;
}

TEST(Render, DeterministicAcrossRunsAndWorkerCounts) {
    const io::Volume v = phantom::generate(phantom::Preset::cohort_a, {48, 48, 48});
    const PreparedVolume pv = prepare(v);
    transfer::RenderParams rp = transfer::default_render_params(v.spacing());
    rp.curvature_mode = transfer::CurvatureMode::linear;
    rp.curvature_lambda = 0.7f;
    const Camera cam = orbit_camera(pv.nv.dims, pv.nv.spacing, 40, 25, 120);
    const FrameBuffer ref = render(pv, {}, rp, cam, 64, 48, 1);
    for (unsigned w : {1u, 2u, 3u, 7u}) {
        const FrameBuffer fb = render(pv, {}, rp, cam, 64, 48, w);
        EXPECT_EQ(fb.rgba8, ref.rgba8);
        EXPECT_EQ(0, std::memcmp(fb.rgba32.data(), ref.rgba32.data(), ref.rgba32.size() * sizeof(float)));
    }
    EXPECT_GT(test::non_background_pixels(ref), 0u);
}

TEST(Render, EarlyStopDropsAtMostTheRemainingTransparency) {
    const io::Volume v = phantom::generate(phantom::Preset::cohort_a, {64, 64, 64});
    const PreparedVolume pv = prepare(v);
    transfer::RenderParams rp = transfer::default_render_params(v.spacing());
    const Camera cam = orbit_camera(pv.nv.dims, pv.nv.spacing, 30, 20, 160);
    const FrameBuffer early = render(pv, {}, rp, cam, 96, 96);
    const float threshold = rp.early_stop_alpha;
    rp.early_stop_alpha = 1.0f;
    const FrameBuffer full = render(pv, {}, rp, cam, 96, 96);
    // A ray stopped at a_acc >= t can still gain at most (1 - t) per channel of unit colour.
    float worst = 0.0f;
    for (std::size_t i = 0; i < early.rgba32.size(); ++i) worst = std::max(worst, std::abs(early.rgba32[i] - full.rgba32[i]));
    EXPECT_LE(worst, 1.0f - threshold + 1e-6f);
    // 8-bit gamma output: 0.01 linear can span two codes in mid-tones.
    EXPECT_LE(test::compare_rgb8(early, full).max, 3.0 / 255);
}

TEST(Render, StepRefinementConverges) {
    // Intensities stay inside the WM window, so the classified integrand is smooth along rays.
    const NormalizedVolume nv = test::field({48, 48, 48}, {1, 1, 1}, [](double x, double y, double z) {
        return 0.2 + 0.7 * (0.5 + 0.5 * std::sin(0.15 * x) * std::cos(0.1 * y + 0.05 * z));
    });
    const PreparedVolume pv = prepare(nv);
    transfer::RenderParams rp = transfer::default_render_params({1, 1, 1});
    const Camera cam = orbit_camera(pv.nv.dims, pv.nv.spacing, 10, 10, 110);
    std::vector<double> means;
    for (float step : {2.0f, 1.0f, 0.5f, 0.25f, 0.125f, 0.0625f}) {
        rp.step_mm = step;
        means.push_back(mean_channel(render(pv, {}, rp, cam, 64, 64)));
    }
    for (std::size_t i = 2; i < means.size(); ++i) {
        EXPECT_LT(std::abs(means[i] - means[i - 1]), std::abs(means[i - 1] - means[i - 2])) << "halving " << i;
    }
}

TEST(Render, RejectsMismatchedFields) {
    PreparedVolume pv = prepare(test::sphere_field(16, 5, 0.1f));
    pv.grad.magnitudes.pop_back();
    const Camera cam = orbit_camera(pv.nv.dims, pv.nv.spacing, 0, 0, 50);
    const transfer::RenderParams rp = transfer::default_render_params({1, 1, 1});
    EXPECT_EQ(code_of([&] { render(pv, {}, rp, cam, 8, 8); }), ErrorCode::PreprocessMismatch);
    pv = prepare(test::sphere_field(16, 5, 0.1f));
    pv.curv.dims = {16, 16, 15};
    EXPECT_EQ(code_of([&] { render(pv, {}, rp, cam, 8, 8); }), ErrorCode::PreprocessMismatch);
}

TEST(Render, PngIsDecodableShape) {
    FrameBuffer fb;
    fb.width = 3;
    fb.height = 2;
    fb.rgba8.assign(24, 200);
    fb.rgba32.assign(24, 0.5f);
    const auto png = encode_png(fb);
    ASSERT_GT(png.size(), 8u);
    EXPECT_EQ(png[1], 'P');
    EXPECT_EQ(png[2], 'N');
    EXPECT_EQ(png[3], 'G');
}
