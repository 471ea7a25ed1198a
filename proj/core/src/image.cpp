#include <png.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "mridvr/error.hpp"
#include "mridvr/raymarch.hpp"
#include "mridvr/volume_io.hpp"

namespace mridvr::raymarch {

namespace {

void append_png_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

} // namespace

std::vector<std::uint8_t> encode_png(const FrameBuffer& fb) {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) throw Error(ErrorCode::Io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::Io, "PNG encoding failed");
    }
    png_set_write_fn(png, &out, append_png_bytes, flush_nothing);
    png_set_IHDR(png, info, static_cast<png_uint_32>(fb.width), static_cast<png_uint_32>(fb.height), 8,
                 PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(fb.width) * 4;
    for (std::int32_t y = 0; y < fb.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(fb.rgba8.data() + static_cast<std::size_t>(y) * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void write_png(const FrameBuffer& fb, const std::filesystem::path& path) {
    const auto bytes = encode_png(fb);
    io::write_file(path, std::as_bytes(std::span(bytes)));
}

void write_raw_rgba(const FrameBuffer& fb, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little, "raw dumps are written in host order");
    io::write_file(path, std::as_bytes(std::span(fb.rgba32)));
}

} // namespace mridvr::raymarch
