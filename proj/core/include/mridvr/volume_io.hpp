#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mridvr/types.hpp"

namespace mridvr::io {

enum class Endianness { little, big };

// NIfTI-1 datatype codes accepted by the loader.
enum class Datatype : std::int16_t {
    uint8 = 2,
    int16 = 4,
    float32 = 16,
    uint16 = 512,
};

std::size_t element_size(Datatype dt);

struct VolumeHeader {
    Dims dims;
    Spacing spacing;
    Datatype datatype = Datatype::float32;
    float scl_slope = 0.0f;
    float scl_inter = 0.0f;
    std::int64_t vox_offset = 352;
    Endianness endianness = Endianness::little;
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 0;
};

// Raw (scaled) intensities with their global extremes.
struct Volume {
    VolumeHeader header;
    std::vector<float> voxels;
    float i_min = 0.0f;
    float i_max = 0.0f;

    const Dims& dims() const { return header.dims; }
    const Spacing& spacing() const { return header.spacing; }
};

constexpr std::size_t kHeaderSize = 348;

// Parses the 348-byte NIfTI-1 header of a single-file (.nii) image. Bytes must already be
// decompressed.
VolumeHeader parse_header(std::span<const std::byte> bytes);

// Accepts plain or gzip-compressed NIfTI-1 bytes.
Volume load_volume(std::span<const std::byte> bytes);

Volume load_file(const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);

bool is_gzip(std::span<const std::byte> bytes);
std::vector<std::byte> gunzip(std::span<const std::byte> bytes);
std::vector<std::byte> gzip(std::span<const std::byte> bytes);

struct EncodeOptions {
    Datatype datatype = Datatype::float32;
    float scl_slope = 0.0f;
    float scl_inter = 0.0f;
    bool compress = false;
};

// Writes a little-endian single-file NIfTI-1 image. Integer datatypes store
// round((v - scl_inter) / scl_slope) (or round(v) without scaling), clamped to the type range.
std::vector<std::byte> encode_nifti(const Volume& volume, const EncodeOptions& options = {});

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

// Builds a Volume (with i_min/i_max) from already-decoded voxels.
Volume make_volume(Dims dims, Spacing spacing, std::vector<float> voxels);

} // namespace mridvr::io
