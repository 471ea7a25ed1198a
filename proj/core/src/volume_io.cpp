#include "mridvr/volume_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "mridvr/error.hpp"

namespace mridvr::io {

namespace {

// NIfTI-1 header field offsets.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffMagic = 344;

class FieldReader {
public:
    FieldReader(std::span<const std::byte> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

    template <typename T>
    T read(std::size_t offset) const {
        std::array<std::byte, sizeof(T)> raw{};
        std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
        if (swap_) std::reverse(raw.begin(), raw.end());
        return std::bit_cast<T>(raw);
    }

private:
    std::span<const std::byte> bytes_;
    bool swap_;
};

template <typename T>
void put(std::vector<std::byte>& out, std::size_t offset, T value) {
    std::memcpy(out.data() + offset, &value, sizeof(T));
}

bool supported_datatype(std::int16_t code) {
    switch (code) {
        case 2:
        case 4:
        case 16:
        case 512:
            return true;
        default:
            return false;
    }
}

template <typename T>
T load_element(const std::byte* p, bool swap) {
    std::array<std::byte, sizeof(T)> raw{};
    std::memcpy(raw.data(), p, sizeof(T));
    if (swap) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
}

} // namespace

std::size_t element_size(Datatype dt) {
    switch (dt) {
        case Datatype::uint8:
            return 1;
        case Datatype::int16:
        case Datatype::uint16:
            return 2;
        case Datatype::float32:
            return 4;
    }
    return 0;
}

bool is_gzip(std::span<const std::byte> bytes) {
    return bytes.size() >= 2 && bytes[0] == std::byte{0x1F} && bytes[1] == std::byte{0x8B};
}

std::vector<std::byte> gunzip(std::span<const std::byte> bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) {
        throw Error(ErrorCode::DecompressionFailure, "inflateInit2 failed");
    }
    std::vector<std::byte> out;
    out.resize(std::max<std::size_t>(bytes.size() * 4, 1 << 16));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<std::byte*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    int rc = Z_OK;
    while (true) {
        if (zs.total_out == out.size()) out.resize(out.size() * 2);
        zs.next_out = reinterpret_cast<Bytef*>(out.data() + zs.total_out);
        zs.avail_out = static_cast<uInt>(std::min<std::size_t>(out.size() - zs.total_out,
                                                               std::numeric_limits<uInt>::max()));
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc == Z_STREAM_END) break;
        if (rc != Z_OK && rc != Z_BUF_ERROR) {
            inflateEnd(&zs);
            throw Error(ErrorCode::DecompressionFailure, "corrupt gzip stream");
        }
        if (rc == Z_BUF_ERROR && zs.avail_in == 0 && zs.avail_out > 0) {
            inflateEnd(&zs);
            throw Error(ErrorCode::DecompressionFailure, "gzip stream ends prematurely");
        }
    }
    out.resize(zs.total_out);
    inflateEnd(&zs);
    return out;
}

std::vector<std::byte> gzip(std::span<const std::byte> bytes) {
    z_stream zs{};
    // Level 6 with a gzip wrapper (windowBits 15 + 16).
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw Error(ErrorCode::DecompressionFailure, "deflateInit2 failed");
    }
    std::vector<std::byte> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 64);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<std::byte*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(ErrorCode::DecompressionFailure, "deflate failed");
    out.resize(zs.total_out);
    return out;
}

VolumeHeader parse_header(std::span<const std::byte> bytes) {
    if (bytes.size() < kHeaderSize) {
        throw Error(ErrorCode::MalformedHeader,
                    "need at least 348 header bytes, got " + std::to_string(bytes.size()));
    }

    const auto native = FieldReader(bytes, false).read<std::int32_t>(kOffSizeofHdr);
    bool swap = false;
    if (native != 348) {
        if (FieldReader(bytes, true).read<std::int32_t>(kOffSizeofHdr) != 348) {
            throw Error(ErrorCode::MalformedHeader, "sizeof_hdr is not 348 in either byte order");
        }
        swap = true;
    }
    const FieldReader r(bytes, swap);

    const char* magic = reinterpret_cast<const char*>(bytes.data() + kOffMagic);
    if (std::memcmp(magic, "n+1\0", 4) != 0) {
        throw Error(ErrorCode::MalformedHeader, "magic is not \"n+1\" (only single-file NIfTI-1 is supported)");
    }

    VolumeHeader h;
    h.endianness = (swap == (std::endian::native == std::endian::little)) ? Endianness::big
                                                                           : Endianness::little;

    std::array<std::int16_t, 8> dim{};
    for (std::size_t i = 0; i < 8; ++i) dim[i] = r.read<std::int16_t>(kOffDim + 2 * i);
    const bool rank3 = dim[0] == 3;
    const bool rank4_singleton = dim[0] == 4 && dim[4] == 1;
    if (!rank3 && !rank4_singleton) {
        throw Error(ErrorCode::MalformedHeader,
                    "only 3D volumes are supported (dim[0]=" + std::to_string(dim[0]) + ")");
    }
    if (dim[1] < 1 || dim[2] < 1 || dim[3] < 1) {
        throw Error(ErrorCode::MalformedHeader, "non-positive dimension");
    }
    h.dims = {dim[1], dim[2], dim[3]};

    const auto code = r.read<std::int16_t>(kOffDatatype);
    if (!supported_datatype(code)) {
        throw Error(ErrorCode::UnsupportedDatatype, "datatype code " + std::to_string(code));
    }
    h.datatype = static_cast<Datatype>(code);
    const auto bitpix = r.read<std::int16_t>(kOffBitpix);
    if (bitpix != 0 && static_cast<std::size_t>(bitpix) != 8 * element_size(h.datatype)) {
        throw Error(ErrorCode::MalformedHeader, "bitpix disagrees with datatype");
    }

    std::array<float, 3> pix{};
    for (std::size_t i = 0; i < 3; ++i) {
        pix[i] = std::fabs(r.read<float>(kOffPixdim + 4 * (i + 1)));
        if (!(pix[i] > 0.0f) || !std::isfinite(pix[i])) {
            throw Error(ErrorCode::MalformedHeader, "voxel spacing must be positive");
        }
    }
    h.spacing = {pix[0], pix[1], pix[2]};

    const float vox_offset = r.read<float>(kOffVoxOffset);
    if (!(vox_offset >= static_cast<float>(kHeaderSize)) || !std::isfinite(vox_offset)) {
        throw Error(ErrorCode::MalformedHeader, "vox_offset below header size");
    }
    h.vox_offset = static_cast<std::int64_t>(vox_offset);

    h.scl_slope = r.read<float>(kOffSclSlope);
    h.scl_inter = r.read<float>(kOffSclInter);
    if (!std::isfinite(h.scl_slope)) h.scl_slope = 0.0f;
    if (!std::isfinite(h.scl_inter)) h.scl_inter = 0.0f;
    h.qform_code = r.read<std::int16_t>(kOffQformCode);
    h.sform_code = r.read<std::int16_t>(kOffSformCode);
    return h;
}

Volume load_volume(std::span<const std::byte> bytes) {
    std::vector<std::byte> inflated;
    if (is_gzip(bytes)) {
        inflated = gunzip(bytes);
        bytes = inflated;
    }

    Volume v;
    v.header = parse_header(bytes);
    const VolumeHeader& h = v.header;
    const bool swap = (h.endianness == Endianness::big) == (std::endian::native == std::endian::little);

    const std::size_t count = h.dims.voxel_count();
    const std::size_t esize = element_size(h.datatype);
    const std::size_t offset = static_cast<std::size_t>(h.vox_offset);
    if (offset > bytes.size() || (bytes.size() - offset) / esize < count) {
        throw Error(ErrorCode::TruncatedPayload,
                    "expected " + std::to_string(count * esize) + " payload bytes after offset " +
                        std::to_string(offset) + ", file has " + std::to_string(bytes.size()));
    }

    v.voxels.resize(count);
    const std::byte* src = bytes.data() + offset;
    const bool scaled = h.scl_slope != 0.0f;
    auto decode = [&](auto tag) {
        using T = decltype(tag);
        for (std::size_t i = 0; i < count; ++i) {
            const float raw = static_cast<float>(load_element<T>(src + i * sizeof(T), swap));
            v.voxels[i] = scaled ? h.scl_slope * raw + h.scl_inter : raw;
        }
    };
    switch (h.datatype) {
        case Datatype::uint8:
            decode(std::uint8_t{});
            break;
        case Datatype::int16:
            decode(std::int16_t{});
            break;
        case Datatype::uint16:
            decode(std::uint16_t{});
            break;
        case Datatype::float32:
            decode(float{});
            break;
    }

    const auto [lo, hi] = std::minmax_element(v.voxels.begin(), v.voxels.end());
    v.i_min = *lo;
    v.i_max = *hi;
    return v;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw Error(ErrorCode::Io, "short read from " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Volume load_file(const std::filesystem::path& path) { return load_volume(read_file(path)); }

Volume make_volume(Dims dims, Spacing spacing, std::vector<float> voxels) {
    if (voxels.size() != dims.voxel_count() || voxels.empty()) {
        throw Error(ErrorCode::InvalidParams, "voxel buffer does not match dims");
    }
    Volume v;
    v.header.dims = dims;
    v.header.spacing = spacing;
    v.voxels = std::move(voxels);
    const auto [lo, hi] = std::minmax_element(v.voxels.begin(), v.voxels.end());
    v.i_min = *lo;
    v.i_max = *hi;
    return v;
}

std::vector<std::byte> encode_nifti(const Volume& volume, const EncodeOptions& options) {
    static_assert(std::endian::native == std::endian::little, "encoder assumes a little-endian host");
    const VolumeHeader& src = volume.header;
    const std::size_t esize = element_size(options.datatype);
    const std::size_t offset = 352;
    std::vector<std::byte> out(offset + volume.voxels.size() * esize, std::byte{0});

    put<std::int32_t>(out, kOffSizeofHdr, 348);
    const std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(src.dims.x),
                                          static_cast<std::int16_t>(src.dims.y),
                                          static_cast<std::int16_t>(src.dims.z), 1, 1, 1, 1};
    for (std::size_t i = 0; i < 8; ++i) put(out, kOffDim + 2 * i, dim[i]);
    put(out, kOffDatatype, static_cast<std::int16_t>(options.datatype));
    put(out, kOffBitpix, static_cast<std::int16_t>(8 * esize));
    const std::array<float, 8> pixdim{1.0f, src.spacing.x, src.spacing.y, src.spacing.z, 1.0f, 1.0f, 1.0f, 1.0f};
    for (std::size_t i = 0; i < 8; ++i) put(out, kOffPixdim + 4 * i, pixdim[i]);
    put(out, kOffVoxOffset, static_cast<float>(offset));
    put(out, kOffSclSlope, options.scl_slope);
    put(out, kOffSclInter, options.scl_inter);
    put<char>(out, 123, 2);  // xyzt_units: mm
    std::memcpy(out.data() + kOffMagic, "n+1\0", 4);

    const bool scaled = options.scl_slope != 0.0f;
    std::byte* dst = out.data() + offset;
    auto encode = [&](auto tag) {
        using T = decltype(tag);
        for (std::size_t i = 0; i < volume.voxels.size(); ++i) {
            T value{};
            if constexpr (std::is_floating_point_v<T>) {
                value = scaled ? (volume.voxels[i] - options.scl_inter) / options.scl_slope : volume.voxels[i];
            } else {
                double raw = volume.voxels[i];
                if (scaled) raw = (raw - options.scl_inter) / options.scl_slope;
                raw = std::clamp(std::round(raw), static_cast<double>(std::numeric_limits<T>::min()),
                                 static_cast<double>(std::numeric_limits<T>::max()));
                value = static_cast<T>(raw);
            }
            std::memcpy(dst + i * sizeof(T), &value, sizeof(T));
        }
    };
    switch (options.datatype) {
        case Datatype::uint8:
            encode(std::uint8_t{});
            break;
        case Datatype::int16:
            encode(std::int16_t{});
            break;
        case Datatype::uint16:
            encode(std::uint16_t{});
            break;
        case Datatype::float32:
            encode(float{});
            break;
    }
    return options.compress ? gzip(out) : out;
}

} // namespace mridvr::io
