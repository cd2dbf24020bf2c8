#include "core/image.hpp"

#include <cstdio>
#include <memory>

#include <png.h>

#include "core/error.hpp"

namespace badbox {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

ImageWithAlpha read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(ErrorCode::io, "cannot open '" + path + "' for reading");

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        fail(ErrorCode::parse, "'" + path + "' is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(ErrorCode::io, "libpng: cannot allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrorCode::io, "libpng: cannot allocate info struct");
    }

    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::parse, "libpng: failed to decode '" + path + "'");
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB or RGBA.
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    const png_byte color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    if (channels != 3 && channels != 4) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::parse, "'" + path + "': unsupported channel count after expansion");
    }

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * channels);
    row_ptrs.resize(height);
    for (int y = 0; y < height; ++y)
        row_ptrs[y] = raw.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageWithAlpha out;
    out.image = Image(width, height);
    if (channels == 4) out.alpha = std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0, n = static_cast<std::size_t>(width) * height; i < n; ++i) {
        out.image.rgb[i * 3 + 0] = raw[i * channels + 0];
        out.image.rgb[i * 3 + 1] = raw[i * channels + 1];
        out.image.rgb[i * 3 + 2] = raw[i * channels + 2];
        if (channels == 4) (*out.alpha)[i] = raw[i * channels + 3];
    }
    return out;
}

namespace {

void write_png_impl(const std::string& path, int width, int height, int channels,
                    const std::uint8_t* data) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(ErrorCode::io, "cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(ErrorCode::io, "libpng: cannot allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrorCode::io, "libpng: cannot allocate info struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::io, "libpng: failed to encode '" + path + "'");
    }

    png_init_io(png, fp.get());
    // Fixed encoder settings; output bytes depend only on pixel content.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, width, height, 8,
                 channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> row_ptrs(height);
    for (int y = 0; y < height; ++y)
        row_ptrs[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

void write_png(const std::string& path, const Image& image) {
    if (image.width < 1 || image.height < 1)
        fail(ErrorCode::invalid_argument, "cannot write empty image to '" + path + "'");
    write_png_impl(path, image.width, image.height, 3, image.rgb.data());
}

void write_png_rgba(const std::string& path, const Image& image,
                    const std::vector<std::uint8_t>& alpha) {
    if (image.width < 1 || image.height < 1)
        fail(ErrorCode::invalid_argument, "cannot write empty image to '" + path + "'");
    if (alpha.size() != static_cast<std::size_t>(image.width) * image.height)
        fail(ErrorCode::invalid_argument, "alpha plane size does not match image");
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(image.width) * image.height * 4);
    for (std::size_t i = 0, n = static_cast<std::size_t>(image.width) * image.height; i < n; ++i) {
        raw[i * 4 + 0] = image.rgb[i * 3 + 0];
        raw[i * 4 + 1] = image.rgb[i * 3 + 1];
        raw[i * 4 + 2] = image.rgb[i * 3 + 2];
        raw[i * 4 + 3] = alpha[i];
    }
    write_png_impl(path, image.width, image.height, 4, raw.data());
}

} // namespace badbox
