#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mridvr/types.hpp"
#include "mridvr/volume_io.hpp"

namespace mridvr {

// Min-max normalized intensities in [0, 1], same grid as the source volume.
struct NormalizedVolume {
    Dims dims;
    Spacing spacing;
    std::vector<float> values;

    float at(std::int32_t i, std::int32_t j, std::int32_t k) const { return values[linear_index(dims, i, j, k)]; }
};

} // namespace mridvr

namespace mridvr::radiometry {

constexpr int kBins = 256;
constexpr float kBinWidth = 1.0f / kBins;

// Voxels below this normalized value (the zeroth bin) are treated as air and excluded from
// the histogram statistics.
constexpr float kBackgroundThreshold = 1.0f / kBins;

struct Histogram {
    std::array<std::uint64_t, kBins> bins{};
    std::uint64_t total_voxels = 0;
    std::uint64_t used_voxels = 0;

    std::uint64_t excluded_voxels() const { return total_voxels - used_voxels; }
};

enum class Tissue { csf = 0, gm = 1, wm = 2 };

struct TissuePeaks {
    double csf = 0.0;
    double gm = 0.0;
    double wm = 0.0;

    double operator[](Tissue t) const { return t == Tissue::csf ? csf : (t == Tissue::gm ? gm : wm); }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool closed_hi = false;

    bool contains(double v) const { return v >= lo && (closed_hi ? v <= hi : v < hi); }
};

// Target windows: CSF [0.05, 0.12), GM [0.12, 0.18), WM [0.18, 1.0].
constexpr std::array<Interval, 3> kTargetWindows{{
    {0.05, 0.12, false},
    {0.12, 0.18, false},
    {0.18, 1.00, true},
}};

struct WindowCheck {
    std::array<bool, 3> in_window{};
    std::array<Interval, 3> targets = kTargetWindows;

    bool all() const { return in_window[0] && in_window[1] && in_window[2]; }
};

struct AnalysisReport {
    std::uint64_t total_voxels = 0;
    std::uint64_t used_voxels = 0;
    double i_max_raw = 0.0;
    TissuePeaks peaks;
    WindowCheck check;

    std::string to_json(bool pretty = false) const;
};

// (raw - i_min) / (i_max - i_min), evaluated in single precision so that the GPU upload pass
// reproduces it bit for bit. Throws DegenerateRange on constant volumes.
NormalizedVolume normalize(const io::Volume& volume);

// workers = 0 picks the hardware concurrency; the result does not depend on it.
Histogram build_histogram(const NormalizedVolume& nv, unsigned workers = 0);

std::size_t bin_index(float v);

// Two passes of a width-3 moving average with truncated windows at the edges.
std::array<double, kBins> smooth_histogram(const Histogram& h);

// Three dominant, mutually separated local maxima of the smoothed histogram, ascending, as
// bin-centre intensities. Throws InsufficientModes.
TissuePeaks extract_tissue_peaks(const Histogram& h);

WindowCheck validate_peaks(const TissuePeaks& peaks);

AnalysisReport analyze(const io::Volume& volume);

struct PeakStatistics {
    TissuePeaks mean;
    TissuePeaks stddev;  // sample standard deviation (n - 1)
};

PeakStatistics aggregate(const std::vector<TissuePeaks>& rows);

} // namespace mridvr::radiometry
