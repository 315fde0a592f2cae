#include "syndr/distortion.hpp"

#include "syndr/error.hpp"
#include "syndr/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace syndr {

namespace {

std::uint8_t to_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

// Mirror without repeating the edge sample: -1 -> 1, n -> n - 2.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
    return static_cast<std::size_t>(m);
}

std::vector<double> gaussian_kernel(double sigma) {
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

int level_index(const DistortionSpec& spec) {
    if (spec.level < kMinLevel || spec.level > kMaxLevel) {
        throw Error(ErrorCode::out_of_range,
                    "distortion level " + std::to_string(spec.level) + " outside [1,5]");
    }
    return spec.level - 1;
}

constexpr std::size_t kBlock = 8;

struct DctBasis {
    double c[kBlock][kBlock]; // c[u][x]

    DctBasis() {
        for (std::size_t u = 0; u < kBlock; ++u) {
            const double alpha = u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
            for (std::size_t x = 0; x < kBlock; ++x) {
                c[u][x] = alpha * std::cos((2.0 * static_cast<double>(x) + 1.0) *
                                           static_cast<double>(u) * std::numbers::pi / (2.0 * kBlock));
            }
        }
    }
};

const DctBasis& dct_basis() {
    static const DctBasis basis;
    return basis;
}

} // namespace

std::string_view to_string(DistortionType type) noexcept {
    switch (type) {
    case DistortionType::gaussian_blur: return "gaussian_blur";
    case DistortionType::white_noise: return "white_noise";
    case DistortionType::contrast_decrease: return "contrast_decrease";
    case DistortionType::dct_quantization: return "dct_quantization";
    }
    return "unknown";
}

std::optional<DistortionType> parse_distortion_type(std::string_view name) noexcept {
    for (auto t : kDistortionRegistry) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

Image gaussian_blur(const Image& image, double sigma) {
    validate_image(image);
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "blur sigma must be positive");
    const auto kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const std::size_t w = image.width, h = image.height, ch = Image::channels;

    // Horizontal pass into f64, vertical pass from f64; round once at the end.
    std::vector<double> tmp(image.sample_count());
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    const auto sx = reflect_index(static_cast<std::ptrdiff_t>(x) + k, w);
                    acc += kernel[static_cast<std::size_t>(k + radius)] * image.at(sx, y, c);
                }
                tmp[(y * w + x) * ch + c] = acc;
            }
        }
    }
    Image out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    const auto sy = reflect_index(static_cast<std::ptrdiff_t>(y) + k, h);
                    acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[(sy * w + x) * ch + c];
                }
                out.at(x, y, c) = to_u8(acc);
            }
        }
    }
    return out;
}

Image add_white_noise(const Image& image, double sigma, std::uint64_t seed) {
    validate_image(image);
    if (sigma < 0.0) throw Error(ErrorCode::invalid_argument, "noise sigma must be non-negative");
    BoxMuller normal(seed);
    Image out(image.width, image.height);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        out.pixels[i] = to_u8(static_cast<double>(image.pixels[i]) + sigma * normal.next());
    }
    return out;
}

Image decrease_contrast(const Image& image, double factor) {
    validate_image(image);
    const std::size_t ch = Image::channels;
    const std::size_t count = image.width * image.height;
    std::array<double, Image::channels> mean{};
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t c = 0; c < ch; ++c) mean[c] += image.pixels[p * ch + c];
    }
    for (double& m : mean) m /= static_cast<double>(count);

    Image out(image.width, image.height);
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t c = 0; c < ch; ++c) {
            const double x = image.pixels[p * ch + c];
            out.pixels[p * ch + c] = to_u8(mean[c] + factor * (x - mean[c]));
        }
    }
    return out;
}

Image dct_quantize(const Image& image, double step) {
    validate_image(image);
    if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "quantization step must be positive");
    const auto& basis = dct_basis().c;
    const std::size_t w = image.width, h = image.height, ch = Image::channels;
    Image out(w, h);

    double block[kBlock][kBlock];
    double tmp[kBlock][kBlock];
    double coef[kBlock][kBlock];
    for (std::size_t by = 0; by < h; by += kBlock) {
        for (std::size_t bx = 0; bx < w; bx += kBlock) {
            for (std::size_t c = 0; c < ch; ++c) {
                // Level-shifted samples; positions past the edge are zero in
                // the shifted domain and are cropped after the inverse.
                for (std::size_t y = 0; y < kBlock; ++y) {
                    for (std::size_t x = 0; x < kBlock; ++x) {
                        const std::size_t px = bx + x, py = by + y;
                        block[y][x] = (px < w && py < h) ? image.at(px, py, c) - 128.0 : 0.0;
                    }
                }
                // Forward: coef = C * block * C^T
                for (std::size_t u = 0; u < kBlock; ++u) {
                    for (std::size_t x = 0; x < kBlock; ++x) {
                        double acc = 0.0;
                        for (std::size_t y = 0; y < kBlock; ++y) acc += basis[u][y] * block[y][x];
                        tmp[u][x] = acc;
                    }
                }
                for (std::size_t u = 0; u < kBlock; ++u) {
                    for (std::size_t v = 0; v < kBlock; ++v) {
                        double acc = 0.0;
                        for (std::size_t x = 0; x < kBlock; ++x) acc += tmp[u][x] * basis[v][x];
                        coef[u][v] = std::round(acc / step) * step;
                    }
                }
                // Inverse: block = C^T * coef * C
                for (std::size_t y = 0; y < kBlock; ++y) {
                    for (std::size_t v = 0; v < kBlock; ++v) {
                        double acc = 0.0;
                        for (std::size_t u = 0; u < kBlock; ++u) acc += basis[u][y] * coef[u][v];
                        tmp[y][v] = acc;
                    }
                }
                for (std::size_t y = 0; y < kBlock; ++y) {
                    for (std::size_t x = 0; x < kBlock; ++x) {
                        const std::size_t px = bx + x, py = by + y;
                        if (px >= w || py >= h) continue;
                        double acc = 0.0;
                        for (std::size_t v = 0; v < kBlock; ++v) acc += tmp[y][v] * basis[v][x];
                        out.at(px, py, c) = to_u8(acc + 128.0);
                    }
                }
            }
        }
    }
    return out;
}

Image apply_distortion(const Image& image, const DistortionSpec& spec) {
    validate_image(image);
    const int li = level_index(spec);
    switch (spec.type) {
    case DistortionType::gaussian_blur: return gaussian_blur(image, kBlurSigma[li]);
    case DistortionType::white_noise: return add_white_noise(image, kNoiseSigma[li], spec.seed);
    case DistortionType::contrast_decrease: return decrease_contrast(image, kContrastFactor[li]);
    case DistortionType::dct_quantization: return dct_quantize(image, kDctStep[li]);
    }
    throw Error(ErrorCode::invalid_argument, "unknown distortion type");
}

double severity(const Image& distorted, const Image& reference) {
    validate_image(distorted);
    validate_image(reference);
    if (distorted.width != reference.width || distorted.height != reference.height) {
        throw Error(ErrorCode::dimension_mismatch, "severity: image dimensions differ");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < distorted.pixels.size(); ++i) {
        const double d = static_cast<double>(distorted.pixels[i]) - static_cast<double>(reference.pixels[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(distorted.pixels.size());
}

} // namespace syndr
