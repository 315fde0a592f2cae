#include "syndr/drcdown.hpp"

#include "syndr/bound.hpp"
#include "syndr/error.hpp"
#include "syndr/parallel.hpp"
#include "syndr/rng.hpp"
#include "syndr/union_find.hpp"

#include <algorithm>
#include <cmath>

namespace syndr::drcdown {

namespace {

constexpr std::size_t kTile = 256;

std::map<std::size_t, std::size_t> histogram(const std::vector<std::size_t>& sizes) {
    std::map<std::size_t, std::size_t> h;
    for (auto s : sizes) ++h[s];
    return h;
}

} // namespace

std::vector<std::size_t> ClusterPartition::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(members.size());
    for (const auto& c : members) out.push_back(c.size());
    return out;
}

SimilarPairSet find_similar_pairs(const FeatureSet& features, std::span<const double> labels, double t_df,
                                  double t_g) {
    const std::size_t n = features.size();
    if (labels.size() != n) {
        throw Error(ErrorCode::dimension_mismatch, "find_similar_pairs: " + std::to_string(n) + " features vs " +
                                                       std::to_string(labels.size()) + " labels");
    }
    if (!(t_df > 0.0) || !(t_g > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "find_similar_pairs: thresholds must be positive");
    }

    // Rows are split into contiguous blocks; each block scans its upper
    // triangle in column tiles. Concatenating blocks in order yields the
    // lexicographic (i, j) order.
    std::vector<SimilarPairSet> per_block(block_count(n));
    parallel_blocks(n, [&](std::size_t begin, std::size_t end, std::size_t block) {
        auto& out = per_block[block];
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t tile = i + 1; tile < n; tile += kTile) {
                const std::size_t tile_end = std::min(n, tile + kTile);
                for (std::size_t j = tile; j < tile_end; ++j) {
                    // Label gate first: it is exact and far cheaper than the distance.
                    if (!(std::abs(labels[i] - labels[j]) < t_g)) continue;
                    if (row_distance(features, i, features, j) < t_df) out.emplace_back(i, j);
                }
            }
        }
    });
    SimilarPairSet pairs;
    for (auto& b : per_block) pairs.insert(pairs.end(), b.begin(), b.end());
    return pairs;
}

ClusterPartition cluster_pairs(const SimilarPairSet& pairs, std::size_t n) {
    UnionFind dsu(n);
    for (const auto& [a, b] : pairs) {
        if (a >= n || b >= n) {
            throw Error(ErrorCode::out_of_range, "cluster_pairs: pair (" + std::to_string(a) + ", " +
                                                     std::to_string(b) + ") out of range for n=" + std::to_string(n));
        }
        dsu.unite(a, b);
    }
    // Ascending scan: the first member seen for a root is its smallest index.
    ClusterPartition p;
    p.cluster_of.resize(n);
    std::vector<std::size_t> slot_of_root(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = dsu.find(i);
        if (slot_of_root[root] == n) {
            slot_of_root[root] = p.members.size();
            p.members.emplace_back();
        }
        const std::size_t slot = slot_of_root[root];
        p.members[slot].push_back(i);
        p.cluster_of[i] = p.members[slot].front();
    }
    return p;
}

std::size_t kept_count(std::size_t cluster_size, std::size_t t_u) {
    // Real-valued guard N/2 > T_u, floored keep count, as in the algorithm.
    if (static_cast<double>(cluster_size) / 2.0 > static_cast<double>(t_u)) {
        return std::max(cluster_size / 2, t_u);
    }
    return cluster_size;
}

std::vector<std::size_t> thin_cluster(std::span<const std::size_t> members, std::size_t cluster_id,
                                      std::size_t t_u, std::uint64_t seed) {
    std::vector<std::size_t> pool(members.begin(), members.end());
    const std::size_t keep = kept_count(pool.size(), t_u);
    if (keep == pool.size()) return pool;

    SplitMix64 rng(seed ^ static_cast<std::uint64_t>(cluster_id));
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(keep);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<std::size_t> downsample_clusters(const ClusterPartition& partition, std::size_t t_u,
                                             std::uint64_t seed) {
    if (t_u < 1) throw Error(ErrorCode::invalid_argument, "downsample_clusters: T_u must be >= 1");
    std::vector<std::vector<std::size_t>> kept(partition.m());
    parallel_blocks(partition.m(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t c = begin; c < end; ++c) {
            const auto& members = partition.members[c];
            kept[c] = thin_cluster(members, members.front(), t_u, seed);
        }
    });
    std::vector<std::size_t> out;
    for (const auto& k : kept) out.insert(out.end(), k.begin(), k.end());
    std::sort(out.begin(), out.end());
    return out;
}

DrcDownResult drcdown(const FeatureSet& features, const Manifest& manifest, const DrcDownConfig& config,
                      std::uint64_t seed) {
    if (features.size() != manifest.size()) {
        throw Error(ErrorCode::id_misalignment, "drcdown: " + std::to_string(features.size()) +
                                                    " feature rows vs " + std::to_string(manifest.size()) +
                                                    " manifest records");
    }
    if (manifest.empty()) return {};
    // Align features to manifest order by id.
    std::vector<std::size_t> row_of(manifest.size());
    std::vector<double> labels(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto row = features.find(manifest[i].id);
        if (!row) {
            throw Error(ErrorCode::id_misalignment, "drcdown: no feature row for record '" + manifest[i].id + "'");
        }
        row_of[i] = *row;
        labels[i] = manifest[i].label;
    }
    const FeatureSet aligned = features.subset(row_of);

    const auto pairs = find_similar_pairs(aligned, labels, config.t_df, config.t_g);
    const auto partition = cluster_pairs(pairs, manifest.size());
    auto kept = downsample_clusters(partition, config.t_u, seed);

    DrcDownResult result;
    result.kept.reserve(kept.size());
    for (auto i : kept) result.kept.push_back(manifest[i]);
    result.kept_indices = std::move(kept);

    auto& rep = result.report;
    rep.n_before = manifest.size();
    rep.n_after = result.kept.size();
    rep.pairs = pairs.size();
    rep.m = partition.m();
    const auto before = partition.sizes();
    std::vector<std::size_t> after;
    after.reserve(before.size());
    for (auto s : before) {
        const auto k = kept_count(s, config.t_u);
        if (k < s) ++rep.clusters_thinned;
        after.push_back(k);
    }
    rep.size_histogram_before = histogram(before);
    rep.size_histogram_after = histogram(after);
    if (!before.empty()) {
        rep.eta_before = bound::redundancy_heterogeneity(before);
        rep.eta_after = bound::redundancy_heterogeneity(after);
    }
    return result;
}

} // namespace syndr::drcdown
