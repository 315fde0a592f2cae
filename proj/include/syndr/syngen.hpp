#pragma once

#include "syndr/distortion.hpp"
#include "syndr/features.hpp"
#include "syndr/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace syndr::syngen {

/// How the neighbor filter and the softmax read their distances.
///  corrected:     keep nn iff d(nn) − d(nearest) < T_rf; weights ∝ exp(−d).
///  paper_literal: keep nn iff d(nearest) − d(nn) < T_rf; weights ∝ exp(+d).
/// The literal form keeps every neighbor and favours the farthest one; it
/// exists for auditing only.
enum class NeighborRule { corrected, paper_literal };

struct WeightedNeighbor {
    std::string id;
    double distance = 0.0;
    double weight = 0.0;
};

struct NeighborAssignment {
    std::string new_ref_id;
    std::vector<WeightedNeighbor> neighbors; // ascending distance
};

struct GenSynConfig {
    std::size_t k = 5;
    double t_rf = 0.05;
    std::vector<int> levels = {1, 3, 5};
    std::vector<DistortionType> types{kDistortionRegistry.begin(), kDistortionRegistry.end()};
    NeighborRule rule = NeighborRule::corrected;
    std::uint64_t seed = 0; // mixed into every white_noise stream

    /// Directory holding `<new_ref_id>.ppm` for every new reference.
    std::filesystem::path new_ref_image_dir;
    /// Generated images go to `<output_root>/<image_subdir>/<record_id>.ppm`;
    /// records store the path relative to output_root. Empty output_root
    /// skips image synthesis (labels only).
    std::filesystem::path output_root;
    std::string image_subdir = "images";
    double reference_label = 10.0;
};

struct GenSynResult {
    Manifest records; // sorted by (ref_id, dist_type, dist_level)
    std::vector<NeighborAssignment> assignments;
    std::size_t distorted_count = 0;
    std::size_t reference_count = 0;
};

std::vector<Neighbor> filter_neighbors(std::span<const Neighbor> neighbors, std::size_t k, double t_rf,
                                       NeighborRule rule = NeighborRule::corrected);

std::vector<double> neighbor_weights(std::span<const double> distances,
                                     NeighborRule rule = NeighborRule::corrected);

double pseudo_label(std::span<const double> weights, std::span<const double> labels);

/// kNN + filter + softmax for one new reference.
NeighborAssignment assign_neighbors(std::span<const float> query, std::string new_ref_id,
                                    const FeatureSet& ref_features, const GenSynConfig& config);

/// Record id for the synthesized image of a new reference.
std::string generated_record_id(std::string_view new_ref_id, DistortionType type, int level);

/// Noise seed for one generated record; a pure function of the base seed
/// and the record id.
std::uint64_t record_seed(std::uint64_t base, std::string_view record_id);

GenSynResult generate_synthetic(const Manifest& manifest, const FeatureSet& ref_features,
                                const FeatureSet& new_ref_features, const GenSynConfig& config);

} // namespace syndr::syngen
