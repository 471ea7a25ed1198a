// mridvr command-line front end: analyze, render, bench (and the hidden gen-phantom).
//
// Exit codes: 0 ok, 1 I/O or pipeline failure, 2 fewer than three tissue modes, 3 a peak
// outside its target window, 4 GPU required but unavailable.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mridvr/error.hpp"
#include "mridvr/gpu_engine.hpp"
#include "mridvr/phantom.hpp"
#include "mridvr/radiometry.hpp"
#include "mridvr/raymarch.hpp"
#include "mridvr/transfer.hpp"
#include "mridvr/volume_io.hpp"

namespace {

using namespace mridvr;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitModes = 2;
constexpr int kExitOutOfWindow = 3;
constexpr int kExitNoGpu = 4;

std::vector<float> parse_floats(const std::string& text, std::size_t count, const char* what) {
    std::vector<float> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stof(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidParams, std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.size() != count) {
        throw Error(ErrorCode::InvalidParams, std::string(what) + " expects " + std::to_string(count) + " values");
    }
    return out;
}

Vec3 parse_vec3(const std::string& text, const char* what) {
    const auto v = parse_floats(text, 3, what);
    return {v[0], v[1], v[2]};
}

std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find_first_of("xX");
    int w = 0, h = 0;
    try {
        if (x == std::string::npos) throw std::invalid_argument(text);
        w = std::stoi(text.substr(0, x));
        h = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidParams, "--size must look like 512x512");
    }
    if (w <= 0 || h <= 0 || w > 16384 || h > 16384) throw Error(ErrorCode::InvalidParams, "--size out of range");
    return {w, h};
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << text << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InsufficientModes: return kExitModes;
        case ErrorCode::GpuUnavailable: return kExitNoGpu;
        default: return kExitFailure;
    }
}

struct AnalyzeArgs {
    std::string input;
    std::string output;
    bool pretty = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const io::Volume volume = io::load_file(a.input);
    const radiometry::AnalysisReport report = radiometry::analyze(volume);
    write_text(a.output, report.to_json(a.pretty));
    return report.check.all() ? kExitOk : kExitOutOfWindow;
}

struct CameraArgs {
    std::string orbit;
    std::string eye;
    std::string target;
    std::string up;
    float vfov = 40.0f;
};

// Explicit eye/target wins; otherwise orbit "az,el,dist" (dist <= 0 or omitted: fit the volume).
raymarch::Camera make_camera(const CameraArgs& c, const Dims& dims, const Spacing& spacing, int w, int h) {
    const float aspect = static_cast<float>(w) / static_cast<float>(h);
    const raymarch::Box box = raymarch::volume_bounds(dims, spacing);
    if (!c.eye.empty()) {
        raymarch::Camera cam;
        cam.eye = parse_vec3(c.eye, "--eye");
        cam.target = c.target.empty() ? box.extent * 0.5f : parse_vec3(c.target, "--target");
        if (!c.up.empty()) cam.up = parse_vec3(c.up, "--up");
        cam.vfov_deg = c.vfov;
        cam.aspect = aspect;
        return cam;
    }
    float az = 30.0f, el = 20.0f, dist = 0.0f;
    if (!c.orbit.empty()) {
        const auto v = parse_floats(c.orbit, 3, "--orbit");
        az = v[0];
        el = v[1];
        dist = v[2];
    }
    if (!(dist > 0.0f)) dist = 1.5f * length(box.extent);
    raymarch::Camera cam = raymarch::orbit_camera(dims, spacing, az, el, dist, c.vfov, aspect);
    if (!c.up.empty()) cam.up = parse_vec3(c.up, "--up");
    return cam;
}

gpu::FrameSetup load_setup(const std::string& params_path, const io::Volume& volume) {
    gpu::FrameSetup s;
    s.params = transfer::default_render_params(volume.spacing());
    if (!params_path.empty()) transfer::apply_config_json(read_text(params_path), s.windows, s.params);
    transfer::validate(s.windows, s.params);
    return s;
}

struct RenderArgs {
    std::string input;
    std::string output;
    std::string params;
    std::string size = "512x512";
    std::string raw;
    CameraArgs camera;
    bool cpu_only = false;
    bool require_gpu = false;
    unsigned workers = 0;
};

int cmd_render(const RenderArgs& a) {
    if (a.cpu_only && a.require_gpu) throw Error(ErrorCode::InvalidParams, "--cpu-only conflicts with --require-gpu");
    const auto [w, h] = parse_size(a.size);
    const io::Volume volume = io::load_file(a.input);
    gpu::FrameSetup setup = load_setup(a.params, volume);
    setup.camera = make_camera(a.camera, volume.dims(), volume.spacing(), w, h);

    std::optional<gpu::GpuContext> ctx;
    if (!a.cpu_only) {
        try {
            ctx.emplace(gpu::init_context());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::GpuUnavailable || a.require_gpu) throw;
            std::cerr << "mridvr: GPU unavailable (" << e.what() << "); using the CPU renderer\n";
        }
    }

    raymarch::FrameBuffer fb;
    std::string backend;
    if (ctx) {
        const gpu::GpuVolume gv = gpu::upload_and_preprocess(*ctx, volume);
        gpu::set_params(*ctx, gv, setup.windows, setup.params, setup.camera);
        fb = gpu::render_frame(*ctx, gv, w, h);
        backend = "gpu (" + ctx->device().name + ")";
    } else {
        const raymarch::PreparedVolume pv = raymarch::prepare(volume, a.workers);
        fb = raymarch::render(pv, setup.windows, setup.params, setup.camera, w, h, a.workers);
        backend = "cpu";
    }
    raymarch::write_png(fb, a.output);
    if (!a.raw.empty()) raymarch::write_raw_rgba(fb, a.raw);
    std::cerr << "mridvr: rendered " << w << "x" << h << " on " << backend << " -> " << a.output << '\n';
    return kExitOk;
}

struct BenchArgs {
    std::string input;
    std::string output;
    std::string params;
    std::string size = "512x512";
    double seconds = 5.0;
    CameraArgs camera;
    bool pretty = true;
};

int cmd_bench(const BenchArgs& a) {
    const auto [w, h] = parse_size(a.size);
    if (!(a.seconds >= 0.0)) throw Error(ErrorCode::InvalidParams, "--seconds must be >= 0");
    gpu::GpuContext ctx = gpu::init_context();
    const std::vector<std::byte> bytes = io::read_file(a.input);

    auto setup = [&](const io::Volume& v) {
        gpu::FrameSetup s = load_setup(a.params, v);
        s.camera = make_camera(a.camera, v.dims(), v.spacing(), w, h);
        return s;
    };
    gpu::TtfpResult first = gpu::measure_ttfp(ctx, bytes, setup, w, h);
    const std::uint64_t preprocess_before = ctx.preprocess_dispatches();
    gpu::FpsResult fps = gpu::measure_fps(ctx, first.volume, first.setup, a.seconds, w, h);
    if (ctx.preprocess_dispatches() != preprocess_before) {
        throw Error(ErrorCode::DeviceLost, "preprocessing was re-dispatched during interaction");
    }

    gpu::BenchReport report;
    report.ttfp_ms = first.ttfp_ms;
    report.fps = fps.fps;
    report.frame_times_ms = std::move(fps.frame_times_ms);
    report.width = w;
    report.height = h;
    report.dims = first.volume.dims;
    report.device_name = ctx.device().name;
    write_text(a.output, report.to_json(a.pretty));
    std::cerr << "mridvr: ttfp " << report.ttfp_ms << " ms, " << report.fps << " fps at " << w << "x" << h << " on "
              << report.device_name << '\n';
    return kExitOk;
}

struct PhantomArgs {
    std::string preset = "cohort-a";
    std::string dims = "128,128,128";
    std::string output;
};

int cmd_gen_phantom(const PhantomArgs& a) {
    const auto d = parse_floats(a.dims, 3, "--dims");
    for (float v : d) {
        if (!(v >= 3.0f && v <= 4096.0f) || v != std::floor(v)) throw Error(ErrorCode::InvalidParams, "bad --dims");
    }
    const Dims dims{static_cast<std::int32_t>(d[0]), static_cast<std::int32_t>(d[1]), static_cast<std::int32_t>(d[2])};
    const phantom::Preset preset = phantom::parse_preset(a.preset);
    const io::Volume v = phantom::generate(preset, dims);
    io::EncodeOptions opts;
    opts.datatype = v.header.datatype;
    opts.compress = a.output.size() > 3 && a.output.ends_with(".gz");
    io::write_file(a.output, io::encode_nifti(v, opts));
    return kExitOk;
}

void add_camera_options(CLI::App* cmd, CameraArgs& c) {
    cmd->add_option("--orbit", c.orbit, "Orbit camera az,el,dist (degrees, degrees, mm; dist 0 fits the volume)");
    cmd->add_option("--eye", c.eye, "Explicit eye position x,y,z in mm (overrides --orbit)");
    cmd->add_option("--target", c.target, "Look-at point x,y,z in mm (default: volume centre)");
    cmd->add_option("--up", c.up, "Up vector x,y,z (default 0,0,1)");
    cmd->add_option("--vfov", c.vfov, "Vertical field of view in degrees")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MRI direct volume rendering: tissue analysis, rendering and benchmarks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mridvr 0.3.0");

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Histogram tissue peaks of a NIfTI volume as JSON");
    an->add_option("input", analyze.input, "NIfTI-1 file (.nii or .nii.gz)")->required();
    an->add_option("--out,-o", analyze.output, "Output JSON path (default: stdout)");
    an->add_flag("--pretty", analyze.pretty, "Indent the JSON");

    RenderArgs render;
    auto* rn = app.add_subcommand("render", "Render one frame to PNG");
    rn->add_option("input", render.input, "NIfTI-1 file (.nii or .nii.gz)")->required();
    rn->add_option("--out,-o", render.output, "Output PNG path")->required();
    rn->add_option("--params", render.params, "JSON transfer-function / render parameters");
    rn->add_option("--size", render.size, "Image size WxH")->capture_default_str();
    rn->add_option("--raw", render.raw, "Also write linear float32 RGBA");
    rn->add_flag("--cpu-only", render.cpu_only, "Use the CPU reference renderer");
    rn->add_flag("--require-gpu", render.require_gpu, "Fail with exit code 4 instead of falling back to the CPU");
    rn->add_option("--workers", render.workers, "CPU worker threads (0 = hardware concurrency)");
    add_camera_options(rn, render.camera);

    BenchArgs bench;
    auto* bn = app.add_subcommand("bench", "Measure time-to-first-pixel and sustained FPS on the GPU");
    bn->add_option("input", bench.input, "NIfTI-1 file (.nii or .nii.gz)")->required();
    bn->add_option("--out,-o", bench.output, "Output JSON path (default: stdout)");
    bn->add_option("--params", bench.params, "JSON transfer-function / render parameters");
    bn->add_option("--size", bench.size, "Image size WxH")->capture_default_str();
    bn->add_option("--seconds", bench.seconds, "Duration of the FPS run")->capture_default_str();
    add_camera_options(bn, bench.camera);

    PhantomArgs ph;
    auto* gp = app.add_subcommand("gen-phantom", "Write a synthetic test volume");
    gp->group("");
    gp->add_option("--preset", ph.preset, "cohort-a | cohort-b | cohort-c | bimodal | constant")->capture_default_str();
    gp->add_option("--dims", ph.dims, "Grid size x,y,z")->capture_default_str();
    gp->add_option("--out,-o", ph.output, "Output path; .gz compresses")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitFailure;
    }

    try {
        if (an->parsed()) return cmd_analyze(analyze);
        if (rn->parsed()) return cmd_render(render);
        if (bn->parsed()) return cmd_bench(bench);
        if (gp->parsed()) return cmd_gen_phantom(ph);
    } catch (const Error& e) {
        std::cerr << "mridvr: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "mridvr: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
