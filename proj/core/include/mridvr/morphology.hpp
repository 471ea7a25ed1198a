#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mridvr/radiometry.hpp"
#include "mridvr/types.hpp"

namespace mridvr::morphology {

// Below this gradient magnitude (normalized intensity per mm) the direction is undefined and
// curvature is reported as zero.
constexpr float kGradientEpsilon = 1e-6f;

struct GradientField {
    Dims dims;
    std::vector<Vec3> vectors;
    std::vector<float> magnitudes;
    float grad_max = 0.0f;
};

struct CurvatureField {
    Dims dims;
    std::vector<float> kappa;
};

using Hessian = std::array<std::array<double, 3>, 3>;

// Central differences in the interior, one-sided first-order differences on each axis boundary.
// Throws VolumeTooSmall when any axis has fewer than 3 voxels.
GradientField gradient_field(const NormalizedVolume& nv, unsigned workers = 0);

// Second central differences; off-diagonals from the four diagonal neighbours. Throws
// BoundaryCoordinate unless the voxel is at least one voxel away from every face.
Hessian hessian_at(const NormalizedVolume& nv, std::int32_t i, std::int32_t j, std::int32_t k);

// kappa = g^T H g with g the unit gradient; zero on the boundary shell and where |grad| < eps.
CurvatureField directional_curvature(const NormalizedVolume& nv, const GradientField& g, unsigned workers = 0);

// Exact maximum by a chunked reduction; chunk count never changes the result.
float max_gradient_magnitude(const GradientField& g, unsigned workers = 0);

// Robust curvature normalizer: nearest-rank 99th percentile of |kappa| over voxels with
// I_norm >= 1/256. Falls back to 1 when that percentile is zero or no voxel qualifies.
float kappa_scale(const NormalizedVolume& nv, const CurvatureField& c);

// Zero-based nearest-rank index of the 99th percentile among n sorted samples.
std::size_t percentile_rank(std::size_t n);

} // namespace mridvr::morphology
