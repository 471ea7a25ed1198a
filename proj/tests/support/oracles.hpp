#pragma once

// Brute-force reference implementations written straight from the finite-difference definitions.
// Slow on purpose; used only to cross-check the production kernels.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mridvr/radiometry.hpp"

namespace mridvr::oracle {

inline double at(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k) {
    return nv.values[(static_cast<std::size_t>(k) * nv.dims.y + j) * nv.dims.x + i];
}

inline std::array<double, 3> gradient(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k) {
    std::array<double, 3> g{};
    const std::int32_t c[3] = {i, j, k};
    for (int a = 0; a < 3; ++a) {
        std::int32_t lo[3] = {i, j, k}, hi[3] = {i, j, k};
        const std::int32_t n = nv.dims[a];
        double span = 2.0;
        if (c[a] == 0) {
            hi[a] = 1;
            span = 1.0;
        } else if (c[a] == n - 1) {
            lo[a] = n - 2;
            span = 1.0;
        } else {
            lo[a] = c[a] - 1;
            hi[a] = c[a] + 1;
        }
        g[a] = (at(nv, hi[0], hi[1], hi[2]) - at(nv, lo[0], lo[1], lo[2])) / (span * nv.spacing[a]);
    }
    return g;
}

// Diagonal terms as the difference of forward and backward slopes; mixed terms as the
// central difference along b of the central difference along a.
inline std::array<std::array<double, 3>, 3> hessian(const NormalizedVolume& nv, std::int32_t i, std::int32_t j,
                                                    std::int32_t k) {
    std::array<std::array<double, 3>, 3> H{};
    auto shifted = [&](int a, int da, int b, int db) {
        std::int32_t p[3] = {i, j, k};
        p[a] += da;
        p[b] += db;
        return at(nv, p[0], p[1], p[2]);
    };
    const double centre = at(nv, i, j, k);
    for (int a = 0; a < 3; ++a) {
        const double h = nv.spacing[a];
        const double fwd = (shifted(a, 1, a, 0) - centre) / h;
        const double bwd = (centre - shifted(a, -1, a, 0)) / h;
        H[a][a] = (fwd - bwd) / h;
        for (int b = a + 1; b < 3; ++b) {
            const double up = (shifted(a, 1, b, 1) - shifted(a, -1, b, 1)) / (2.0 * h);
            const double down = (shifted(a, 1, b, -1) - shifted(a, -1, b, -1)) / (2.0 * h);
            H[a][b] = H[b][a] = (up - down) / (2.0 * nv.spacing[b]);
        }
    }
    return H;
}

inline double curvature(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k) {
    if (i == 0 || j == 0 || k == 0 || i == nv.dims.x - 1 || j == nv.dims.y - 1 || k == nv.dims.z - 1) return 0.0;
    const auto g = gradient(nv, i, j, k);
    const double m = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    if (m < 1e-6) return 0.0;
    const auto H = hessian(nv, i, j, k);
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += g[a] / m * H[a][b] * g[b] / m;
    return s;
}

inline float sequential_max(const std::vector<float>& v) {
    float m = 0.0f;
    for (float x : v)
        if (x > m) m = x;
    return m;
}

} // namespace mridvr::oracle
