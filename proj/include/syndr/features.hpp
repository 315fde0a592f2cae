#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace syndr {

/// A single embedding row. Stored as f32 (the on-disk precision); every
/// distance computation widens to f64.
struct FeatureVector {
    std::string id;
    std::vector<float> values;
};

/// Immutable, id-indexed embedding matrix. Row order is file order.
class FeatureSet {
public:
    FeatureSet() = default;

    /// Validates and builds. Throws syndr::Error on empty dim, ragged rows,
    /// duplicate ids, non-finite entries or zero-norm rows.
    FeatureSet(std::size_t dim, std::vector<FeatureVector> rows);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    const std::string& id(std::size_t row) const { return ids_[row]; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    std::span<const float> row(std::size_t row) const {
        return {data_.data() + row * dim_, dim_};
    }

    /// Σ v² of a row in f64, cached at construction.
    double squared_norm(std::size_t row) const { return squared_norms_[row]; }

    std::optional<std::size_t> find(std::string_view id) const;

    FeatureVector vector(std::size_t row) const;

    /// New set holding the given rows in the given order.
    FeatureSet subset(std::span<const std::size_t> rows) const;

    bool operator==(const FeatureSet& other) const {
        return dim_ == other.dim_ && ids_ == other.ids_ && data_ == other.data_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::vector<double> squared_norms_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Reads FSET1 (by magic) or falls back to CSV.
FeatureSet load_features(const std::filesystem::path& path);
FeatureSet parse_features_csv(std::string_view text);
FeatureSet parse_features_fset1(std::string_view bytes);

/// Writes CSV when the extension is ".csv", FSET1 otherwise.
void write_features(const std::filesystem::path& path, const FeatureSet& set);
std::string encode_fset1(const FeatureSet& set);
std::string encode_csv(const FeatureSet& set);

double cosine_distance(std::span<const float> u, std::span<const float> v);
double cosine_distance(const FeatureVector& u, const FeatureVector& v);

/// Cosine distance between row i of a and row j of b using cached norms;
/// bit-identical to cosine_distance() on the same rows.
double row_distance(const FeatureSet& a, std::size_t i, const FeatureSet& b, std::size_t j);

/// Row-major |A|×|B| matrix of cosine distances.
struct DistanceMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

DistanceMatrix pairwise_distances(const FeatureSet& a, const FeatureSet& b);

struct Neighbor {
    std::string id;
    double distance = 0.0;
    bool operator==(const Neighbor&) const = default;
};

/// k nearest rows of `set` to `query`, ascending by distance, ties by
/// ascending id.
std::vector<Neighbor> knn(std::span<const float> query, const FeatureSet& set, std::size_t k);
std::vector<Neighbor> knn(const FeatureVector& query, const FeatureSet& set, std::size_t k);

} // namespace syndr
