#include "mridvr/radiometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mridvr/error.hpp"
#include "mridvr/parallel.hpp"

namespace mridvr::radiometry {

namespace {

constexpr int kSmoothWidth = 3;
constexpr int kSmoothPasses = 2;
constexpr int kMinPeakSeparation = 3;

std::array<double, kBins> moving_average(const std::array<double, kBins>& in) {
    constexpr int half = kSmoothWidth / 2;
    std::array<double, kBins> out{};
    for (int i = 0; i < kBins; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(kBins - 1, i + half);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += in[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

struct Candidate {
    int bin;
    double height;
};

// Plateau-aware local maxima: a run of equal values counts once, at its (lower) middle bin,
// when both neighbours of the run are strictly lower (or absent).
std::vector<Candidate> local_maxima(const std::array<double, kBins>& s) {
    std::vector<Candidate> out;
    int i = 0;
    while (i < kBins) {
        int end = i;
        while (end + 1 < kBins && s[static_cast<std::size_t>(end + 1)] == s[static_cast<std::size_t>(i)]) ++end;
        const double v = s[static_cast<std::size_t>(i)];
        const bool left_lower = i == 0 || s[static_cast<std::size_t>(i - 1)] < v;
        const bool right_lower = end == kBins - 1 || s[static_cast<std::size_t>(end + 1)] < v;
        if (v > 0.0 && left_lower && right_lower) out.push_back({(i + end) / 2, v});
        i = end + 1;
    }
    return out;
}

double bin_center(int bin) { return (static_cast<double>(bin) + 0.5) / kBins; }

} // namespace

NormalizedVolume normalize(const io::Volume& volume) {
    if (!(volume.i_max > volume.i_min)) {
        throw Error(ErrorCode::DegenerateRange, "i_max equals i_min; a constant volume carries no structure");
    }
    NormalizedVolume nv;
    nv.dims = volume.dims();
    nv.spacing = volume.spacing();
    nv.values.resize(volume.voxels.size());
    const float lo = volume.i_min;
    const float range = volume.i_max - volume.i_min;
    std::transform(volume.voxels.begin(), volume.voxels.end(), nv.values.begin(), [=](float raw) {
        return std::clamp((raw - lo) / range, 0.0f, 1.0f);
    });
    return nv;
}

std::size_t bin_index(float v) {
    const auto idx = static_cast<long>(std::floor(static_cast<double>(v) * kBins));
    return static_cast<std::size_t>(std::clamp<long>(idx, 0, kBins - 1));
}

Histogram build_histogram(const NormalizedVolume& nv, unsigned workers) {
    const std::size_t n = nv.values.size();
    std::vector<std::array<std::uint64_t, kBins>> partial(resolve_workers(workers));
    for (auto& p : partial) p.fill(0);

    parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
        auto& bins = partial[w];
        for (std::size_t i = begin; i < end; ++i) {
            const float v = nv.values[i];
            if (v < kBackgroundThreshold) continue;
            ++bins[bin_index(v)];
        }
    });

    Histogram h;
    h.total_voxels = n;
    for (const auto& p : partial) {
        for (std::size_t b = 0; b < kBins; ++b) h.bins[b] += p[b];
    }
    h.used_voxels = std::accumulate(h.bins.begin(), h.bins.end(), std::uint64_t{0});
    return h;
}

std::array<double, kBins> smooth_histogram(const Histogram& h) {
    std::array<double, kBins> s{};
    std::transform(h.bins.begin(), h.bins.end(), s.begin(), [](std::uint64_t c) { return static_cast<double>(c); });
    for (int pass = 0; pass < kSmoothPasses; ++pass) s = moving_average(s);
    return s;
}

TissuePeaks extract_tissue_peaks(const Histogram& h) {
    auto maxima = local_maxima(smooth_histogram(h));
    std::stable_sort(maxima.begin(), maxima.end(), [](const Candidate& a, const Candidate& b) {
        if (a.height != b.height) return a.height > b.height;
        return a.bin < b.bin;
    });

    std::vector<int> chosen;
    for (const Candidate& c : maxima) {
        const bool separated = std::all_of(chosen.begin(), chosen.end(), [&](int other) {
            return std::abs(other - c.bin) >= kMinPeakSeparation;
        });
        if (separated) chosen.push_back(c.bin);
        if (chosen.size() == 3) break;
    }
    if (chosen.size() < 3) {
        throw Error(ErrorCode::InsufficientModes,
                    "found " + std::to_string(chosen.size()) + " separated histogram modes, need 3");
    }
    std::sort(chosen.begin(), chosen.end());
    return {bin_center(chosen[0]), bin_center(chosen[1]), bin_center(chosen[2])};
}

WindowCheck validate_peaks(const TissuePeaks& peaks) {
    WindowCheck check;
    check.in_window = {kTargetWindows[0].contains(peaks.csf), kTargetWindows[1].contains(peaks.gm),
                       kTargetWindows[2].contains(peaks.wm)};
    return check;
}

AnalysisReport analyze(const io::Volume& volume) {
    const NormalizedVolume nv = normalize(volume);
    const Histogram h = build_histogram(nv);
    AnalysisReport report;
    report.total_voxels = h.total_voxels;
    report.used_voxels = h.used_voxels;
    report.i_max_raw = volume.i_max;
    report.peaks = extract_tissue_peaks(h);
    report.check = validate_peaks(report.peaks);
    return report;
}

std::string AnalysisReport::to_json(bool pretty) const {
    auto interval = [](const Interval& w) {
        return nlohmann::json{{"lo", w.lo}, {"hi", w.hi}, {"closed_hi", w.closed_hi}};
    };
    const nlohmann::json j = {
        {"total_voxels", total_voxels},
        {"used_voxels", used_voxels},
        {"i_max_raw", i_max_raw},
        {"peaks", {{"csf", peaks.csf}, {"gm", peaks.gm}, {"wm", peaks.wm}}},
        {"in_window", {{"csf", check.in_window[0]}, {"gm", check.in_window[1]}, {"wm", check.in_window[2]}}},
        {"window_targets",
         {{"csf", interval(check.targets[0])}, {"gm", interval(check.targets[1])}, {"wm", interval(check.targets[2])}}},
    };
    return j.dump(pretty ? 2 : -1);
}

PeakStatistics aggregate(const std::vector<TissuePeaks>& rows) {
    PeakStatistics stats;
    if (rows.empty()) return stats;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        stats.mean.csf += r.csf / n;
        stats.mean.gm += r.gm / n;
        stats.mean.wm += r.wm / n;
    }
    if (rows.size() > 1) {
        for (const auto& r : rows) {
            stats.stddev.csf += (r.csf - stats.mean.csf) * (r.csf - stats.mean.csf);
            stats.stddev.gm += (r.gm - stats.mean.gm) * (r.gm - stats.mean.gm);
            stats.stddev.wm += (r.wm - stats.mean.wm) * (r.wm - stats.mean.wm);
        }
        stats.stddev.csf = std::sqrt(stats.stddev.csf / (n - 1));
        stats.stddev.gm = std::sqrt(stats.stddev.gm / (n - 1));
        stats.stddev.wm = std::sqrt(stats.stddev.wm / (n - 1));
    }
    return stats;
}

} // namespace mridvr::radiometry
