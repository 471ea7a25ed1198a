#pragma once

#include <cstdint>
#include <string_view>

#include "mridvr/types.hpp"
#include "mridvr/volume_io.hpp"

namespace mridvr::phantom {

// Deterministic synthetic head: air, scalp fat, skull, CSF, folded cortex (GM), WM core with
// ventricles, plus an optional enhancing lesion and vessel tubes. Tissue intensities are drawn
// from Gaussians around the given normalized modes and scaled by i_max_raw.
struct PhantomSpec {
    Dims dims{128, 128, 128};
    Spacing spacing{1.0f, 1.0f, 1.0f};
    double i_max_raw = 1154.0;
    double csf = 0.110;
    double gm = 0.167;
    double wm = 0.183;
    double tissue_sigma = 0.002;
    double skull = 0.02;
    double fat = 0.90;
    double fat_sigma = 0.03;
    bool lesion = false;
    double lesion_value = 0.55;
    bool vessels = false;
    double vessel_value = 0.45;
    std::uint64_t seed = 20240601;
    io::Datatype datatype = io::Datatype::float32;
};

enum class Preset { cohort_a, cohort_b, cohort_c, bimodal, constant };

PhantomSpec preset_spec(Preset p, Dims dims);
Preset parse_preset(std::string_view name);

io::Volume generate(const PhantomSpec& spec);

// Presets other than the tri-modal tissue heads.
io::Volume generate(Preset p, Dims dims);

} // namespace mridvr::phantom
