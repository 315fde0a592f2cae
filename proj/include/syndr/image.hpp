#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace syndr {

/// 8-bit RGB image, row-major, interleaved.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    static constexpr std::size_t channels = 3;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(w * h * channels, fill) {}

    std::size_t sample_count() const noexcept { return width * height * channels; }

    std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) {
        return pixels[(y * width + x) * channels + c];
    }
    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
        return pixels[(y * width + x) * channels + c];
    }

    bool operator==(const Image&) const = default;
};

/// Throws unless width/height are positive and the buffer length matches.
void validate_image(const Image& image);

/// Binary PPM (P6) with maxval 255.
Image decode_ppm(std::string_view bytes);
std::string encode_ppm(const Image& image);
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

} // namespace syndr
