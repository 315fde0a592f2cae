#pragma once

#include "syndr/image.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace syndr {

/// The distortion registry. Names are the manifest `dist_type` strings.
enum class DistortionType {
    gaussian_blur,
    white_noise,
    contrast_decrease,
    dct_quantization,
};

inline constexpr std::array<DistortionType, 4> kDistortionRegistry = {
    DistortionType::gaussian_blur,
    DistortionType::white_noise,
    DistortionType::contrast_decrease,
    DistortionType::dct_quantization,
};

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

std::string_view to_string(DistortionType type) noexcept;
std::optional<DistortionType> parse_distortion_type(std::string_view name) noexcept;

struct DistortionSpec {
    DistortionType type = DistortionType::gaussian_blur;
    int level = 1;
    std::uint64_t seed = 0; // consumed by white_noise only
};

/// Per-level parameters (index = level - 1).
inline constexpr std::array<double, 5> kBlurSigma = {0.8, 1.6, 2.4, 3.2, 4.0};
inline constexpr std::array<double, 5> kNoiseSigma = {5.0, 10.0, 15.0, 20.0, 25.0};
inline constexpr std::array<double, 5> kContrastFactor = {0.85, 0.70, 0.55, 0.40, 0.25};
inline constexpr std::array<double, 5> kDctStep = {8.0, 16.0, 24.0, 40.0, 64.0};

/// Pure function of (image, spec); output has the input's dimensions.
Image apply_distortion(const Image& image, const DistortionSpec& spec);

/// Mean squared error over all samples.
double severity(const Image& distorted, const Image& reference);

// Individual operators, exposed for tests and for callers that want a
// parameter off the level ramp.
Image gaussian_blur(const Image& image, double sigma);
Image add_white_noise(const Image& image, double sigma, std::uint64_t seed);
Image decrease_contrast(const Image& image, double factor);
Image dct_quantize(const Image& image, double step);

} // namespace syndr
