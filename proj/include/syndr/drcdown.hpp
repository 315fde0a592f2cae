#pragma once

#include "syndr/features.hpp"
#include "syndr/manifest.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace syndr::drcdown {

/// Index pairs (i < j), lexicographically sorted, no duplicates.
using SimilarPairSet = std::vector<std::pair<std::size_t, std::size_t>>;

struct ClusterPartition {
    std::vector<std::size_t> cluster_of;        // sample -> cluster id (smallest member index)
    std::vector<std::vector<std::size_t>> members; // per cluster, ascending; clusters ordered by id
    std::size_t m() const noexcept { return members.size(); }
    std::vector<std::size_t> sizes() const;
};

struct DrcDownConfig {
    double t_df = 0.1;
    double t_g = 1.0;
    std::size_t t_u = 20;
};

struct DrcDownReport {
    std::size_t n_before = 0;
    std::size_t n_after = 0;
    std::size_t pairs = 0;
    std::size_t m = 0;
    std::size_t clusters_thinned = 0;
    std::map<std::size_t, std::size_t> size_histogram_before; // size -> cluster count
    std::map<std::size_t, std::size_t> size_histogram_after;
    double eta_before = 0.0;
    double eta_after = 0.0;
};

struct DrcDownResult {
    Manifest kept;               // input order preserved
    std::vector<std::size_t> kept_indices;
    DrcDownReport report;
};

/// All pairs with feature distance < T_df and |Δlabel| < T_g (both strict).
SimilarPairSet find_similar_pairs(const FeatureSet& features, std::span<const double> labels, double t_df,
                                  double t_g);

ClusterPartition cluster_pairs(const SimilarPairSet& pairs, std::size_t n);

/// Members kept from a cluster of size n: n when n/2 ≤ T_u, otherwise
/// max(⌊n/2⌋, T_u).
std::size_t kept_count(std::size_t cluster_size, std::size_t t_u);

/// Seeded subsample of one cluster (members must be ascending). Result is
/// ascending.
std::vector<std::size_t> thin_cluster(std::span<const std::size_t> members, std::size_t cluster_id,
                                      std::size_t t_u, std::uint64_t seed);

/// Kept sample indices across the partition, ascending.
std::vector<std::size_t> downsample_clusters(const ClusterPartition& partition, std::size_t t_u,
                                             std::uint64_t seed);

/// Features are matched to records by id; every record needs exactly one
/// feature row and vice versa.
DrcDownResult drcdown(const FeatureSet& features, const Manifest& manifest, const DrcDownConfig& config,
                      std::uint64_t seed);

} // namespace syndr::drcdown
