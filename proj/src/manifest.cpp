#include "syndr/manifest.hpp"

#include "syndr/error.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <tuple>
#include <unordered_set>

namespace syndr {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kKnownKeys[] = {"id",    "image_path", "ref_id",      "dist_type",
                                           "dist_level", "label",  "label_kind", "is_reference"};

bool is_known_key(std::string_view key) {
    for (auto k : kKnownKeys) {
        if (k == key) return true;
    }
    return false;
}

std::string require_string(const ojson& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw Error(ErrorCode::malformed_record, std::string("manifest record missing string field '") + key + "'");
    }
    return it->get<std::string>();
}

} // namespace

std::string_view to_string(LabelKind kind) noexcept {
    return kind == LabelKind::mos ? "mos" : "pseudo";
}

void validate_record(const ManifestRecord& r) {
    const auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::malformed_record, "record '" + r.id + "': " + what);
    };
    if (r.id.empty()) throw Error(ErrorCode::malformed_record, "record with empty id");
    if (r.ref_id.empty()) fail("empty ref_id");
    if (r.dist_type.empty()) fail("empty dist_type");
    if (r.dist_level < 0 || r.dist_level > 5) fail("dist_level " + std::to_string(r.dist_level) + " outside [0,5]");
    if (!r.is_distorted() && r.dist_level != 0) fail("reference records must have dist_level 0");
    if (r.is_distorted() && r.dist_level == 0) fail("distorted records need dist_level in [1,5]");
    if (!std::isfinite(r.label) || r.label < kLabelMin || r.label > kLabelMax) {
        fail("label outside [0,10]");
    }
}

void validate_manifest(const Manifest& manifest) {
    std::unordered_set<std::string> ids;
    std::set<std::tuple<std::string, std::string, int>> keys;
    for (const auto& r : manifest) {
        validate_record(r);
        if (!ids.insert(r.id).second) {
            throw Error(ErrorCode::duplicate_id, "duplicate manifest id '" + r.id + "'");
        }
        if (r.is_distorted() && !keys.emplace(r.ref_id, r.dist_type, r.dist_level).second) {
            throw Error(ErrorCode::duplicate_id, "duplicate (ref_id, dist_type, dist_level) = (" + r.ref_id +
                                                     ", " + r.dist_type + ", " + std::to_string(r.dist_level) +
                                                     ") at record '" + r.id + "'");
        }
    }
}

ManifestRecord parse_record(std::string_view line) {
    ojson obj;
    try {
        obj = ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_record, std::string("invalid JSON in manifest: ") + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorCode::malformed_record, "manifest line is not a JSON object");

    ManifestRecord r;
    r.id = require_string(obj, "id");
    r.image_path = require_string(obj, "image_path");
    r.ref_id = require_string(obj, "ref_id");
    r.dist_type = require_string(obj, "dist_type");

    const auto level = obj.find("dist_level");
    if (level == obj.end() || !level->is_number_integer()) {
        throw Error(ErrorCode::malformed_record, "record '" + r.id + "': dist_level must be an integer");
    }
    r.dist_level = level->get<int>();

    const auto label = obj.find("label");
    if (label == obj.end() || !label->is_number()) {
        throw Error(ErrorCode::malformed_record, "record '" + r.id + "': label must be a number");
    }
    r.label = label->get<double>();

    const std::string kind = require_string(obj, "label_kind");
    if (kind == "mos") {
        r.label_kind = LabelKind::mos;
    } else if (kind == "pseudo") {
        r.label_kind = LabelKind::pseudo;
    } else {
        throw Error(ErrorCode::malformed_record, "record '" + r.id + "': label_kind must be mos or pseudo");
    }

    if (const auto ref = obj.find("is_reference"); ref != obj.end()) {
        if (!ref->is_boolean()) {
            throw Error(ErrorCode::malformed_record, "record '" + r.id + "': is_reference must be boolean");
        }
        r.is_reference = ref->get<bool>();
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!is_known_key(it.key())) r.extra[it.key()] = it.value();
    }
    validate_record(r);
    return r;
}

std::string serialize_record(const ManifestRecord& r) {
    ojson obj;
    obj["id"] = r.id;
    obj["image_path"] = r.image_path;
    obj["ref_id"] = r.ref_id;
    obj["dist_type"] = r.dist_type;
    obj["dist_level"] = r.dist_level;
    obj["label"] = r.label;
    obj["label_kind"] = to_string(r.label_kind);
    if (r.is_reference) obj["is_reference"] = true;
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) obj[it.key()] = it.value();
    return obj.dump();
}

Manifest parse_manifest(std::string_view text) {
    Manifest out;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        try {
            out.push_back(parse_record(line));
        } catch (const Error& e) {
            throw Error(e.code(), "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    validate_manifest(out);
    return out;
}

std::string serialize_manifest(const Manifest& manifest) {
    std::string out;
    for (const auto& r : manifest) {
        out += serialize_record(r);
        out += '\n';
    }
    return out;
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open manifest: " + path.string());
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_manifest(text);
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    const std::string text = serialize_manifest(manifest);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write manifest: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

} // namespace syndr
