#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace syndr {

enum class LabelKind { mos, pseudo };

std::string_view to_string(LabelKind kind) noexcept;

inline constexpr std::string_view kReferenceType = "ref";
inline constexpr double kLabelMin = 0.0;
inline constexpr double kLabelMax = 10.0;

/// One line of a JSON-lines dataset manifest.
struct ManifestRecord {
    std::string id;
    std::string image_path;
    std::string ref_id;
    std::string dist_type; // "ref" for pristine references
    int dist_level = 0;    // 0 for references
    double label = 0.0;    // MOS scale [0, 10]
    LabelKind label_kind = LabelKind::mos;
    bool is_reference = false;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object(); // unknown fields, preserved

    bool is_distorted() const { return dist_type != kReferenceType; }

    bool operator==(const ManifestRecord&) const = default;
};

using Manifest = std::vector<ManifestRecord>;

/// Throws syndr::Error(malformed_record) if the record breaks a field invariant.
void validate_record(const ManifestRecord& record);

/// Checks per-record invariants plus id uniqueness and uniqueness of
/// (ref_id, dist_type, dist_level) among distorted records.
void validate_manifest(const Manifest& manifest);

ManifestRecord parse_record(std::string_view line);
std::string serialize_record(const ManifestRecord& record);

Manifest parse_manifest(std::string_view text);
std::string serialize_manifest(const Manifest& manifest);

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

} // namespace syndr
