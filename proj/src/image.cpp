#include "syndr/image.hpp"

#include "syndr/error.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

namespace syndr {

namespace {

class PpmHeaderReader {
public:
    explicit PpmHeaderReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t next_uint() {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (++digits > 9) throw Error(ErrorCode::malformed_header, "PPM header value too large");
            ++pos_;
        }
        if (digits == 0) throw Error(ErrorCode::malformed_header, "PPM header: expected integer");
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw Error(ErrorCode::malformed_header, "PPM header: missing separator before raster");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 2;
};

} // namespace

void validate_image(const Image& image) {
    if (image.width == 0 || image.height == 0) {
        throw Error(ErrorCode::invalid_argument, "image has zero width or height");
    }
    if (image.pixels.size() != image.sample_count()) {
        throw Error(ErrorCode::dimension_mismatch, "image buffer length does not match width*height*3");
    }
}

Image decode_ppm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw Error(ErrorCode::malformed_header, "not a binary PPM (P6) file");
    }
    PpmHeaderReader header(bytes);
    const std::size_t width = header.next_uint();
    const std::size_t height = header.next_uint();
    const std::size_t maxval = header.next_uint();
    if (maxval != 255) {
        throw Error(ErrorCode::malformed_header, "PPM maxval must be 255, got " + std::to_string(maxval));
    }
    const std::size_t offset = header.raster_offset();
    Image img;
    img.width = width;
    img.height = height;
    if (width == 0 || height == 0) throw Error(ErrorCode::invalid_argument, "PPM has zero size");
    if (bytes.size() - offset < img.sample_count()) {
        throw Error(ErrorCode::dimension_mismatch, "PPM raster truncated");
    }
    const auto* raster = reinterpret_cast<const std::uint8_t*>(bytes.data() + offset);
    img.pixels.assign(raster, raster + img.sample_count());
    return img;
}

std::string encode_ppm(const Image& image) {
    validate_image(image);
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open image: " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_ppm(bytes);
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    const std::string bytes = encode_ppm(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write image: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

} // namespace syndr
