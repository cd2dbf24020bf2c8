#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace badbox {

// 8-bit RGB raster, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // width * height * 3

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t& at(int x, int y, int c) {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

struct ImageWithAlpha {
    Image image;
    std::optional<std::vector<std::uint8_t>> alpha; // width * height when present
};

ImageWithAlpha read_png(const std::string& path);

// Compression settings are pinned so identical pixels produce identical files.
void write_png(const std::string& path, const Image& image);
void write_png_rgba(const std::string& path, const Image& image,
                    const std::vector<std::uint8_t>& alpha);

} // namespace badbox
