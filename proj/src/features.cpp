#include "syndr/features.hpp"

#include "syndr/error.hpp"
#include "syndr/parallel.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace syndr {

namespace {

constexpr char kMagic[6] = {'F', 'S', 'E', 'T', '1', '\0'};

double dot(std::span<const float> u, std::span<const float> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    }
    return acc;
}

double sum_squares(std::span<const float> u) { return dot(u, u); }

// sqrt(su * sv) rather than sqrt(su) * sqrt(sv): for u == v this gives
// sqrt(su²) == su exactly, so the distance is exactly 0.
double cosine_from_parts(double uv, double su, double sv) {
    const double d = 1.0 - uv / std::sqrt(su * sv);
    return std::clamp(d, 0.0, 2.0);
}

std::uint32_t read_u32(std::string_view bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) {
        v = (v << 8) | static_cast<unsigned char>(bytes[at + b]);
    }
    return v;
}

std::uint16_t read_u16(std::string_view bytes, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[at]) |
                                      (static_cast<unsigned char>(bytes[at + 1]) << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open feature file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

FeatureSet::FeatureSet(std::size_t dim, std::vector<FeatureVector> rows) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::malformed_header, "feature dimension must be >= 1");
    ids_.reserve(rows.size());
    data_.reserve(rows.size() * dim);
    squared_norms_.reserve(rows.size());
    index_.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto& row = rows[r];
        if (row.values.size() != dim) {
            throw Error(ErrorCode::dimension_mismatch,
                        "row " + std::to_string(r) + " ('" + row.id + "') has " +
                            std::to_string(row.values.size()) + " values, expected " +
                            std::to_string(dim));
        }
        for (float v : row.values) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::non_finite,
                            "non-finite entry in row " + std::to_string(r) + " ('" + row.id + "')");
            }
        }
        const double sq = sum_squares(row.values);
        if (!(sq > 0.0)) {
            throw Error(ErrorCode::zero_norm,
                        "zero-norm vector in row " + std::to_string(r) + " ('" + row.id + "')");
        }
        if (!index_.emplace(row.id, r).second) {
            throw Error(ErrorCode::duplicate_id, "duplicate id '" + row.id + "'");
        }
        ids_.push_back(std::move(row.id));
        data_.insert(data_.end(), row.values.begin(), row.values.end());
        squared_norms_.push_back(sq);
    }
}

std::optional<std::size_t> FeatureSet::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

FeatureVector FeatureSet::vector(std::size_t r) const {
    const auto values = row(r);
    return {ids_[r], std::vector<float>(values.begin(), values.end())};
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> rows) const {
    std::vector<FeatureVector> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(vector(r));
    return FeatureSet(dim_, std::move(out));
}

FeatureSet parse_features_fset1(std::string_view bytes) {
    if (bytes.size() < 14 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw Error(ErrorCode::malformed_header, "missing FSET1 magic or truncated header");
    }
    const std::uint32_t n = read_u32(bytes, 6);
    const std::uint32_t d = read_u32(bytes, 10);
    if (d == 0) throw Error(ErrorCode::malformed_header, "FSET1 header declares dim 0");

    std::vector<FeatureVector> rows;
    rows.reserve(n);
    std::size_t at = 14;
    for (std::uint32_t r = 0; r < n; ++r) {
        if (at + 2 > bytes.size()) {
            throw Error(ErrorCode::malformed_header,
                        "FSET1 truncated before record " + std::to_string(r));
        }
        const std::uint16_t len = read_u16(bytes, at);
        at += 2;
        const std::size_t need = static_cast<std::size_t>(len) + 4 * static_cast<std::size_t>(d);
        if (at + need > bytes.size()) {
            throw Error(ErrorCode::dimension_mismatch,
                        "FSET1 record " + std::to_string(r) + " shorter than declared dim " +
                            std::to_string(d));
        }
        FeatureVector fv;
        fv.id.assign(bytes.substr(at, len));
        at += len;
        fv.values.resize(d);
        for (std::uint32_t j = 0; j < d; ++j, at += 4) {
            fv.values[j] = std::bit_cast<float>(read_u32(bytes, at));
        }
        rows.push_back(std::move(fv));
    }
    if (at != bytes.size()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "FSET1 has " + std::to_string(bytes.size() - at) +
                        " trailing bytes; row count or dim disagrees with payload");
    }
    return FeatureSet(d, std::move(rows));
}

FeatureSet parse_features_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw Error(ErrorCode::malformed_header, "empty CSV feature file");

    const auto header = split(lines.front(), ',');
    if (header.size() < 2 || trim(header[0]) != "id") {
        throw Error(ErrorCode::malformed_header, "CSV header must be id,v0,...,v{d-1}");
    }
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (trim(header[j]) != "v" + std::to_string(j - 1)) {
            throw Error(ErrorCode::malformed_header,
                        "CSV header column " + std::to_string(j) + " must be v" +
                            std::to_string(j - 1));
        }
    }
    const std::size_t dim = header.size() - 1;

    std::vector<FeatureVector> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split(lines[r], ',');
        if (cells.size() != dim + 1) {
            throw Error(ErrorCode::dimension_mismatch,
                        "CSV row " + std::to_string(r - 1) + " has " +
                            std::to_string(cells.size() - 1) + " values, expected " +
                            std::to_string(dim));
        }
        FeatureVector fv;
        fv.id = std::string(trim(cells[0]));
        fv.values.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const auto cell = trim(cells[j + 1]);
            float v = 0.0f;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                if (ec == std::errc::result_out_of_range) {
                    throw Error(ErrorCode::non_finite,
                                "non-finite entry in row " + std::to_string(r - 1));
                }
                throw Error(ErrorCode::malformed_record,
                            "unparseable value '" + std::string(cell) + "' in CSV row " +
                                std::to_string(r - 1));
            }
            fv.values[j] = v;
        }
        rows.push_back(std::move(fv));
    }
    return FeatureSet(dim, std::move(rows));
}

FeatureSet load_features(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0) {
        return parse_features_fset1(bytes);
    }
    if (bytes.size() >= 4 && bytes.compare(0, 4, "FSET") == 0) {
        throw Error(ErrorCode::malformed_header, "unsupported FSET version in " + path.string());
    }
    return parse_features_csv(bytes);
}

std::string encode_fset1(const FeatureSet& set) {
    std::string out(kMagic, sizeof kMagic);
    put_u32(out, static_cast<std::uint32_t>(set.size()));
    put_u32(out, static_cast<std::uint32_t>(set.dim()));
    for (std::size_t r = 0; r < set.size(); ++r) {
        const auto& id = set.id(r);
        if (id.size() > 0xffff) {
            throw Error(ErrorCode::invalid_argument, "id longer than 65535 bytes: " + id.substr(0, 32));
        }
        put_u16(out, static_cast<std::uint16_t>(id.size()));
        out += id;
        for (float v : set.row(r)) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

std::string encode_csv(const FeatureSet& set) {
    std::string out = "id";
    for (std::size_t j = 0; j < set.dim(); ++j) out += ",v" + std::to_string(j);
    out += '\n';
    char buf[32];
    for (std::size_t r = 0; r < set.size(); ++r) {
        out += set.id(r);
        for (float v : set.row(r)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            out += ',';
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

void write_features(const std::filesystem::path& path, const FeatureSet& set) {
    const std::string bytes = path.extension() == ".csv" ? encode_csv(set) : encode_fset1(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write feature file: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

double cosine_distance(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "cosine_distance: dims " + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()));
    }
    const double su = sum_squares(u);
    const double sv = sum_squares(v);
    if (!(su > 0.0) || !(sv > 0.0)) {
        throw Error(ErrorCode::zero_norm, "cosine_distance: zero-norm input");
    }
    return cosine_from_parts(dot(u, v), su, sv);
}

double cosine_distance(const FeatureVector& u, const FeatureVector& v) {
    return cosine_distance(std::span<const float>(u.values), std::span<const float>(v.values));
}

double row_distance(const FeatureSet& a, std::size_t i, const FeatureSet& b, std::size_t j) {
    return cosine_from_parts(dot(a.row(i), b.row(j)), a.squared_norm(i), b.squared_norm(j));
}

DistanceMatrix pairwise_distances(const FeatureSet& a, const FeatureSet& b) {
    if (a.dim() != b.dim() && !a.empty() && !b.empty()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "pairwise_distances: dims " + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
    }
    DistanceMatrix m{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
    parallel_blocks(a.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                m.values[i * m.cols + j] = row_distance(a, i, b, j);
            }
        }
    });
    return m;
}

std::vector<Neighbor> knn(std::span<const float> query, const FeatureSet& set, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::invalid_argument, "knn: k must be positive");
    if (k > set.size()) {
        throw Error(ErrorCode::invalid_argument,
                    "knn: k=" + std::to_string(k) + " exceeds set size " + std::to_string(set.size()));
    }
    if (query.size() != set.dim()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "knn: query dim " + std::to_string(query.size()) + " vs set dim " +
                        std::to_string(set.dim()));
    }
    const double sq = sum_squares(query);
    if (!(sq > 0.0)) throw Error(ErrorCode::zero_norm, "knn: zero-norm query");

    std::vector<std::pair<double, std::size_t>> scored(set.size());
    for (std::size_t r = 0; r < set.size(); ++r) {
        scored[r] = {cosine_from_parts(dot(query, set.row(r)), sq, set.squared_norm(r)), r};
    }
    const auto less = [&](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return set.id(x.second) < set.id(y.second);
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), less);

    std::vector<Neighbor> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({set.id(scored[i].second), scored[i].first});
    return out;
}

std::vector<Neighbor> knn(const FeatureVector& query, const FeatureSet& set, std::size_t k) {
    return knn(std::span<const float>(query.values), set, k);
}

} // namespace syndr
