#include "mridvr/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mridvr/error.hpp"
#include "mridvr/parallel.hpp"

namespace mridvr::morphology {

namespace {

double axis_derivative(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k, int axis) {
    const std::int32_t n = nv.dims[axis];
    const std::array<std::int32_t, 3> c{i, j, k};
    const std::int32_t p = c[static_cast<std::size_t>(axis)];
    auto value = [&](std::int32_t q) {
        std::array<std::int32_t, 3> at = c;
        at[static_cast<std::size_t>(axis)] = q;
        return static_cast<double>(nv.at(at[0], at[1], at[2]));
    };
    const double h = nv.spacing[axis];
    if (p == 0) return (value(1) - value(0)) / h;
    if (p == n - 1) return (value(n - 1) - value(n - 2)) / h;
    return (value(p + 1) - value(p - 1)) / (2.0 * h);
}

bool interior(const Dims& d, std::int32_t i, std::int32_t j, std::int32_t k) {
    return i > 0 && j > 0 && k > 0 && i < d.x - 1 && j < d.y - 1 && k < d.z - 1;
}

Hessian hessian_unchecked(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k) {
    const std::array<double, 3> h{nv.spacing.x, nv.spacing.y, nv.spacing.z};
    auto v = [&](std::int32_t di, std::int32_t dj, std::int32_t dk) {
        return static_cast<double>(nv.at(i + di, j + dj, k + dk));
    };
    const double c = v(0, 0, 0);
    Hessian H{};
    H[0][0] = (v(1, 0, 0) - 2.0 * c + v(-1, 0, 0)) / (h[0] * h[0]);
    H[1][1] = (v(0, 1, 0) - 2.0 * c + v(0, -1, 0)) / (h[1] * h[1]);
    H[2][2] = (v(0, 0, 1) - 2.0 * c + v(0, 0, -1)) / (h[2] * h[2]);
    H[0][1] = (v(1, 1, 0) - v(1, -1, 0) - v(-1, 1, 0) + v(-1, -1, 0)) / (4.0 * h[0] * h[1]);
    H[0][2] = (v(1, 0, 1) - v(1, 0, -1) - v(-1, 0, 1) + v(-1, 0, -1)) / (4.0 * h[0] * h[2]);
    H[1][2] = (v(0, 1, 1) - v(0, 1, -1) - v(0, -1, 1) + v(0, -1, -1)) / (4.0 * h[1] * h[2]);
    H[1][0] = H[0][1];
    H[2][0] = H[0][2];
    H[2][1] = H[1][2];
    return H;
}

} // namespace

GradientField gradient_field(const NormalizedVolume& nv, unsigned workers) {
    const Dims d = nv.dims;
    if (d.x < 3 || d.y < 3 || d.z < 3) {
        throw Error(ErrorCode::VolumeTooSmall, "gradient needs at least 3 voxels per axis");
    }
    GradientField g;
    g.dims = d;
    g.vectors.resize(d.voxel_count());
    g.magnitudes.resize(d.voxel_count());

    parallel_chunks(static_cast<std::size_t>(d.z), workers, [&](std::size_t z0, std::size_t z1, unsigned) {
        for (auto k = static_cast<std::int32_t>(z0); k < static_cast<std::int32_t>(z1); ++k) {
            for (std::int32_t j = 0; j < d.y; ++j) {
                for (std::int32_t i = 0; i < d.x; ++i) {
                    const double gx = axis_derivative(nv, i, j, k, 0);
                    const double gy = axis_derivative(nv, i, j, k, 1);
                    const double gz = axis_derivative(nv, i, j, k, 2);
                    const std::size_t idx = linear_index(d, i, j, k);
                    g.vectors[idx] = {static_cast<float>(gx), static_cast<float>(gy), static_cast<float>(gz)};
                    g.magnitudes[idx] = static_cast<float>(std::sqrt(gx * gx + gy * gy + gz * gz));
                }
            }
        }
    });
    g.grad_max = max_gradient_magnitude(g, workers);
    return g;
}

Hessian hessian_at(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k) {
    if (!interior(nv.dims, i, j, k)) {
        throw Error(ErrorCode::BoundaryCoordinate,
                    "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                        ") is not an interior voxel");
    }
    return hessian_unchecked(nv, i, j, k);
}

CurvatureField directional_curvature(const NormalizedVolume& nv, const GradientField& g, unsigned workers) {
    const Dims d = nv.dims;
    CurvatureField c;
    c.dims = d;
    c.kappa.assign(d.voxel_count(), 0.0f);

    parallel_chunks(static_cast<std::size_t>(d.z), workers, [&](std::size_t z0, std::size_t z1, unsigned) {
        for (auto k = static_cast<std::int32_t>(z0); k < static_cast<std::int32_t>(z1); ++k) {
            for (std::int32_t j = 0; j < d.y; ++j) {
                for (std::int32_t i = 0; i < d.x; ++i) {
                    if (!interior(d, i, j, k)) continue;
                    const std::size_t idx = linear_index(d, i, j, k);
                    const float mag = g.magnitudes[idx];
                    if (mag < kGradientEpsilon) continue;
                    const Vec3 gv = g.vectors[idx];
                    const std::array<double, 3> u{gv.x / static_cast<double>(mag), gv.y / static_cast<double>(mag),
                                                  gv.z / static_cast<double>(mag)};
                    const Hessian H = hessian_unchecked(nv, i, j, k);
                    double kappa = 0.0;
                    for (std::size_t a = 0; a < 3; ++a) {
                        for (std::size_t b = 0; b < 3; ++b) kappa += u[a] * H[a][b] * u[b];
                    }
                    c.kappa[idx] = static_cast<float>(kappa);
                }
            }
        }
    });
    return c;
}

float max_gradient_magnitude(const GradientField& g, unsigned workers) {
    const std::size_t n = g.magnitudes.size();
    std::vector<float> partial(resolve_workers(workers), 0.0f);
    parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
        float m = 0.0f;
        for (std::size_t i = begin; i < end; ++i) m = std::max(m, g.magnitudes[i]);
        partial[w] = m;
    });
    return *std::max_element(partial.begin(), partial.end());
}

std::size_t percentile_rank(std::size_t n) {
    // ceil(0.99 n) - 1 in integer arithmetic.
    return (99 * n + 99) / 100 - 1;
}

float kappa_scale(const NormalizedVolume& nv, const CurvatureField& c) {
    std::vector<float> mags;
    mags.reserve(c.kappa.size() / 2);
    for (std::size_t i = 0; i < c.kappa.size(); ++i) {
        if (nv.values[i] >= radiometry::kBackgroundThreshold) mags.push_back(std::fabs(c.kappa[i]));
    }
    if (mags.empty()) return 1.0f;
    const auto nth = mags.begin() + static_cast<std::ptrdiff_t>(percentile_rank(mags.size()));
    std::nth_element(mags.begin(), nth, mags.end());
    return *nth > 0.0f ? *nth : 1.0f;
}

} // namespace mridvr::morphology
