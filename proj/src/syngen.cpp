#include "syndr/syngen.hpp"

#include "syndr/error.hpp"
#include "syndr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace syndr::syngen {

namespace {

using LabelKey = std::tuple<std::string, std::string, int>;

std::map<LabelKey, double> label_index(const Manifest& manifest) {
    std::map<LabelKey, double> index;
    for (const auto& r : manifest) {
        if (r.is_distorted()) index.emplace(LabelKey{r.ref_id, r.dist_type, r.dist_level}, r.label);
    }
    return index;
}

void check_config(const GenSynConfig& config) {
    if (config.k == 0) throw Error(ErrorCode::invalid_argument, "gensyn: k must be positive");
    if (!(config.t_rf > 0.0)) throw Error(ErrorCode::invalid_argument, "gensyn: T_rf must be positive");
    if (config.types.empty()) throw Error(ErrorCode::invalid_argument, "gensyn: no distortion types");
    if (config.levels.empty()) throw Error(ErrorCode::invalid_argument, "gensyn: no distortion levels");
    for (int l : config.levels) {
        if (l < kMinLevel || l > kMaxLevel) {
            throw Error(ErrorCode::out_of_range, "gensyn: level " + std::to_string(l) + " outside [1,5]");
        }
    }
}

} // namespace

std::vector<Neighbor> filter_neighbors(std::span<const Neighbor> neighbors, std::size_t k, double t_rf,
                                       NeighborRule rule) {
    if (neighbors.empty()) throw Error(ErrorCode::invalid_argument, "filter_neighbors: empty neighbor list");
    if (neighbors.size() > k) {
        throw Error(ErrorCode::invalid_argument, "filter_neighbors: more than k neighbors");
    }
    for (std::size_t i = 1; i < neighbors.size(); ++i) {
        if (neighbors[i].distance < neighbors[i - 1].distance) {
            throw Error(ErrorCode::invalid_argument, "filter_neighbors: distances not ascending");
        }
    }
    const double nearest = neighbors.front().distance;
    std::vector<Neighbor> kept{neighbors.front()};
    for (std::size_t i = 1; i < neighbors.size(); ++i) {
        const double d = neighbors[i].distance;
        const double gap = rule == NeighborRule::corrected ? d - nearest : nearest - d;
        if (gap < t_rf) kept.push_back(neighbors[i]);
    }
    return kept;
}

std::vector<double> neighbor_weights(std::span<const double> distances, NeighborRule rule) {
    if (distances.empty()) throw Error(ErrorCode::invalid_argument, "neighbor_weights: empty input");
    const double sign = rule == NeighborRule::corrected ? -1.0 : 1.0;
    double top = -std::numeric_limits<double>::infinity();
    for (double d : distances) {
        if (!std::isfinite(d)) throw Error(ErrorCode::non_finite, "neighbor_weights: non-finite distance");
        top = std::max(top, sign * d);
    }
    std::vector<double> w(distances.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        w[i] = std::exp(sign * distances[i] - top);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

double pseudo_label(std::span<const double> weights, std::span<const double> labels) {
    if (weights.size() != labels.size()) {
        throw Error(ErrorCode::dimension_mismatch, "pseudo_label: " + std::to_string(weights.size()) +
                                                       " weights vs " + std::to_string(labels.size()) + " labels");
    }
    if (weights.empty()) throw Error(ErrorCode::invalid_argument, "pseudo_label: empty input");
    double y = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) y += weights[i] * labels[i];
    // Rounding can push a convex combination a few ulps past its hull.
    const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
    return std::clamp(y, *lo, *hi);
}

NeighborAssignment assign_neighbors(std::span<const float> query, std::string new_ref_id,
                                    const FeatureSet& ref_features, const GenSynConfig& config) {
    const auto nns = knn(query, ref_features, std::min(config.k, ref_features.size()));
    const auto kept = filter_neighbors(nns, config.k, config.t_rf, config.rule);
    std::vector<double> dists;
    dists.reserve(kept.size());
    for (const auto& n : kept) dists.push_back(n.distance);
    const auto w = neighbor_weights(dists, config.rule);

    NeighborAssignment a{std::move(new_ref_id), {}};
    a.neighbors.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) a.neighbors.push_back({kept[i].id, kept[i].distance, w[i]});
    return a;
}

std::string generated_record_id(std::string_view new_ref_id, DistortionType type, int level) {
    return std::string(new_ref_id) + "__" + std::string(to_string(type)) + "__" + std::to_string(level);
}

std::uint64_t record_seed(std::uint64_t base, std::string_view record_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : record_id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h ^ base;
}

GenSynResult generate_synthetic(const Manifest& manifest, const FeatureSet& ref_features,
                                const FeatureSet& new_ref_features, const GenSynConfig& config) {
    check_config(config);
    if (!new_ref_features.empty() && new_ref_features.dim() != ref_features.dim()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "gensyn: new-reference dim " + std::to_string(new_ref_features.dim()) +
                        " vs training-reference dim " + std::to_string(ref_features.dim()));
    }
    if (config.k > ref_features.size()) {
        throw Error(ErrorCode::invalid_argument, "gensyn: k=" + std::to_string(config.k) + " exceeds " +
                                                     std::to_string(ref_features.size()) + " training refs");
    }
    const auto labels = label_index(manifest);

    const std::size_t n = new_ref_features.size();
    std::vector<NeighborAssignment> assignments(n);
    parallel_blocks(n, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            assignments[i] = assign_neighbors(new_ref_features.row(i), new_ref_features.id(i), ref_features, config);
        }
    });

    // Labels are resolved sequentially so that the first hole reported is
    // the same on every run.
    std::vector<Manifest> per_ref(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& new_id = new_ref_features.id(i);
        const auto& nbrs = assignments[i].neighbors;
        std::vector<double> w, y(nbrs.size());
        for (const auto& nb : nbrs) w.push_back(nb.weight);

        ManifestRecord ref_record;
        ref_record.id = new_id;
        ref_record.image_path = (config.new_ref_image_dir / (new_id + ".ppm")).generic_string();
        ref_record.ref_id = new_id;
        ref_record.dist_type = std::string(kReferenceType);
        ref_record.dist_level = 0;
        ref_record.label = config.reference_label;
        ref_record.label_kind = LabelKind::pseudo;
        ref_record.is_reference = true;
        per_ref[i].push_back(std::move(ref_record));

        for (DistortionType t : config.types) {
            const std::string type_name(to_string(t));
            for (int level : config.levels) {
                for (std::size_t j = 0; j < nbrs.size(); ++j) {
                    const auto it = labels.find(LabelKey{nbrs[j].id, type_name, level});
                    if (it == labels.end()) {
                        throw Error(ErrorCode::missing_label,
                                    "manifest has no label for (ref " + nbrs[j].id + ", " + type_name +
                                        ", level " + std::to_string(level) + ") needed by new reference " + new_id);
                    }
                    y[j] = it->second;
                }
                ManifestRecord rec;
                rec.id = generated_record_id(new_id, t, level);
                rec.image_path = (std::filesystem::path(config.image_subdir) / (rec.id + ".ppm")).generic_string();
                rec.ref_id = new_id;
                rec.dist_type = type_name;
                rec.dist_level = level;
                rec.label = pseudo_label(w, y);
                rec.label_kind = LabelKind::pseudo;
                per_ref[i].push_back(std::move(rec));
            }
        }
    }

    if (!config.output_root.empty()) {
        std::filesystem::create_directories(config.output_root / config.image_subdir);
        parallel_blocks(n, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i) {
                const Image pristine = read_ppm(per_ref[i].front().image_path);
                for (std::size_t r = 1; r < per_ref[i].size(); ++r) {
                    const auto& rec = per_ref[i][r];
                    const auto type = *parse_distortion_type(rec.dist_type);
                    const auto out = apply_distortion(pristine, {type, rec.dist_level, record_seed(config.seed, rec.id)});
                    write_ppm(config.output_root / rec.image_path, out);
                }
            }
        });
    }

    GenSynResult result;
    result.assignments = std::move(assignments);
    for (auto& recs : per_ref) {
        for (auto& r : recs) {
            (r.is_distorted() ? result.distorted_count : result.reference_count) += 1;
            result.records.push_back(std::move(r));
        }
    }
    std::sort(result.records.begin(), result.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ref_id, a.dist_type, a.dist_level) < std::tie(b.ref_id, b.dist_type, b.dist_level);
    });
    return result;
}

} // namespace syndr::syngen
