#include "mridvr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mridvr/error.hpp"

namespace mridvr::phantom {

namespace {

// Box-Muller on mt19937_64 output; std::normal_distribution is not portable across libraries.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    std::mt19937_64 engine_;
};

enum class Region { air, fat, skull, csf, gm, wm, lesion, vessel };

struct Geometry {
    double cx, cy, cz;
    double ax, ay, az;
};

Region region_at(const Geometry& g, const PhantomSpec& s, double x, double y, double z) {
    const double dx = (x - g.cx) / g.ax;
    const double dy = (y - g.cy) / g.ay;
    const double dz = (z - g.cz) / g.az;
    const double rho = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (rho > 1.0) return Region::air;
    if (rho > 0.95) return Region::fat;
    if (rho > 0.90) return Region::skull;

    if (s.vessels) {
        // Two vertical tubes and one transverse tube through the CSF/GM layers.
        const double r = 1.5;
        const double vx1 = g.cx + 0.35 * g.ax;
        const double vx2 = g.cx - 0.35 * g.ax;
        const double d1 = std::hypot(x - vx1, y - g.cy);
        const double d2 = std::hypot(x - vx2, y - g.cy - 0.2 * g.ay);
        const double d3 = std::hypot(y - g.cy + 0.3 * g.ay, z - g.cz - 0.25 * g.az);
        if (d1 < r || d2 < r || d3 < r) return Region::vessel;
    }
    if (s.lesion) {
        const double lx = (x - (g.cx + 0.22 * g.ax)) / g.ax;
        const double ly = (y - (g.cy + 0.10 * g.ay)) / g.ay;
        const double lz = (z - (g.cz + 0.15 * g.az)) / g.az;
        if (std::sqrt(lx * lx + ly * ly + lz * lz) < 0.16) return Region::lesion;
    }
    if (rho > 0.82) return Region::csf;

    // Folded cortex: the GM/WM interface undulates with direction.
    const double theta = std::atan2(dy, dx);
    const double phi = std::acos(std::clamp(dz / std::max(rho, 1e-9), -1.0, 1.0));
    const double inner = 0.62 + 0.06 * std::sin(7.0 * theta) * std::sin(6.0 * phi);
    if (rho > inner) return Region::gm;

    // Lateral ventricles.
    for (const double side : {-1.0, 1.0}) {
        const double vx = (x - (g.cx + side * 0.12 * g.ax)) / (0.08 * g.ax);
        const double vy = (y - g.cy) / (0.25 * g.ay);
        const double vz = (z - (g.cz + 0.05 * g.az)) / (0.12 * g.az);
        if (vx * vx + vy * vy + vz * vz < 1.0) return Region::csf;
    }
    return Region::wm;
}

} // namespace

PhantomSpec preset_spec(Preset p, Dims dims) {
    PhantomSpec s;
    s.dims = dims;
    switch (p) {
        case Preset::cohort_a:
            s.i_max_raw = 1154.0;
            s.csf = 0.110;
            s.gm = 0.167;
            s.wm = 0.183;
            s.tissue_sigma = 0.002;
            s.datatype = io::Datatype::int16;
            break;
        case Preset::cohort_b:
            s.i_max_raw = 8034.0;
            s.csf = 0.054;
            s.gm = 0.128;
            s.wm = 0.310;
            s.tissue_sigma = 0.006;
            s.lesion = true;
            s.lesion_value = 0.62;
            s.vessels = true;
            s.datatype = io::Datatype::uint16;
            s.seed += 1;
            break;
        case Preset::cohort_c:
            s.i_max_raw = 17152.9;
            s.csf = 0.063;
            s.gm = 0.128;
            s.wm = 0.181;
            s.tissue_sigma = 0.004;
            s.datatype = io::Datatype::float32;
            s.seed += 2;
            break;
        case Preset::bimodal:
        case Preset::constant:
            throw Error(ErrorCode::InvalidParams, "preset has no tissue specification");
    }
    return s;
}

Preset parse_preset(std::string_view name) {
    if (name == "cohort-a") return Preset::cohort_a;
    if (name == "cohort-b") return Preset::cohort_b;
    if (name == "cohort-c") return Preset::cohort_c;
    if (name == "bimodal") return Preset::bimodal;
    if (name == "constant") return Preset::constant;
    throw Error(ErrorCode::InvalidParams, "unknown phantom preset '" + std::string(name) + "'");
}

io::Volume generate(const PhantomSpec& s) {
    const Dims d = s.dims;
    if (d.x < 8 || d.y < 8 || d.z < 8) throw Error(ErrorCode::InvalidParams, "phantom needs at least 8 voxels per axis");
    const Geometry g{0.5 * (d.x - 1), 0.5 * (d.y - 1), 0.5 * (d.z - 1), 0.46 * d.x, 0.46 * d.y, 0.44 * d.z};

    Gaussian noise(s.seed);
    std::vector<float> voxels(d.voxel_count());
    std::size_t fat_voxel = voxels.size();
    for (std::int32_t k = 0; k < d.z; ++k) {
        for (std::int32_t j = 0; j < d.y; ++j) {
            for (std::int32_t i = 0; i < d.x; ++i) {
                const double n = noise();
                double v = 0.0;
                switch (region_at(g, s, i, j, k)) {
                    case Region::air:
                        v = 0.0;
                        break;
                    case Region::fat:
                        v = s.fat + s.fat_sigma * n;
                        break;
                    case Region::skull:
                        v = s.skull + 0.25 * s.skull * n;
                        break;
                    case Region::csf:
                        v = s.csf + s.tissue_sigma * n;
                        break;
                    case Region::gm:
                        v = s.gm + s.tissue_sigma * n;
                        break;
                    case Region::wm:
                        v = s.wm + s.tissue_sigma * n;
                        break;
                    case Region::lesion:
                        v = s.lesion_value + 0.02 * n;
                        break;
                    case Region::vessel:
                        v = s.vessel_value + 0.02 * n;
                        break;
                }
                const std::size_t idx = linear_index(d, i, j, k);
                if (v > 0.0 && fat_voxel == voxels.size() && v >= s.fat) fat_voxel = idx;
                voxels[idx] = static_cast<float>(std::clamp(v, 0.0, 1.0) * s.i_max_raw);
            }
        }
    }
    // Pin the maximum so normalization maps exactly onto the intended modes.
    if (fat_voxel == voxels.size()) fat_voxel = linear_index(d, d.x / 2, d.y / 2, d.z / 2);
    voxels[fat_voxel] = static_cast<float>(s.i_max_raw);

    io::Volume v = io::make_volume(d, s.spacing, std::move(voxels));
    v.header.datatype = s.datatype;
    return v;
}

io::Volume generate(Preset p, Dims dims) {
    switch (p) {
        case Preset::cohort_a:
        case Preset::cohort_b:
        case Preset::cohort_c:
            return generate(preset_spec(p, dims));
        case Preset::bimodal:
        case Preset::constant:
            break;
    }
    const Geometry g{0.5 * (dims.x - 1), 0.5 * (dims.y - 1), 0.5 * (dims.z - 1), 0.46 * dims.x, 0.46 * dims.y,
                     0.44 * dims.z};
    std::vector<float> voxels(dims.voxel_count(), p == Preset::constant ? 100.0f : 0.0f);
    if (p == Preset::bimodal) {
        for (std::int32_t k = 0; k < dims.z; ++k) {
            for (std::int32_t j = 0; j < dims.y; ++j) {
                for (std::int32_t i = 0; i < dims.x; ++i) {
                    const double dx = (i - g.cx) / g.ax;
                    const double dy = (j - g.cy) / g.ay;
                    const double dz = (k - g.cz) / g.az;
                    const double rho = std::sqrt(dx * dx + dy * dy + dz * dz);
                    if (rho <= 1.0) voxels[linear_index(dims, i, j, k)] = rho <= 0.5 ? 1000.0f : 400.0f;
                }
            }
        }
    }
    io::Volume v = io::make_volume(dims, {1.0f, 1.0f, 1.0f}, std::move(voxels));
    v.header.datatype = io::Datatype::uint16;
    return v;
}

} // namespace mridvr::phantom
