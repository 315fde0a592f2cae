#include "syndr/pipeline.hpp"

#include "syndr/bound.hpp"
#include "syndr/ddcup.hpp"
#include "syndr/drcdown.hpp"
#include "syndr/features.hpp"
#include "syndr/manifest.hpp"
#include "syndr/syngen.hpp"

#include <chrono>
#include <cstdio>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_set>

namespace syndr::pipeline {

namespace fs = std::filesystem;
using syndr::to_json;

namespace {

constexpr const char* kStagingName = ".syndr-staging";

const std::set<std::string> kKnownConfigKeys = {
    "train_manifest", "train_ref_features", "candidate_features", "candidate_images", "record_features",
    "output_dir",     "k",                  "t_rf",               "t_df",             "t_g",
    "t_u",            "levels",             "metric",             "delta",            "rad",
    "seed",           "paper_literal",      "cap_candidates",     "stages",
};

fs::path resolve(const nlohmann::json& j, const char* key, const fs::path& base) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw Error(ErrorCode::invalid_config, std::string("config '") + key + "' must be a string");
    fs::path p = it->get<std::string>();
    if (p.empty()) return {};
    if (p.is_relative()) p = base / p;
    return fs::absolute(p).lexically_normal();
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& field) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        field = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::invalid_config, std::string("config '") + key + "' has the wrong type");
    }
}

std::string path_string(const fs::path& p) { return p.empty() ? std::string() : p.generic_string(); }

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string issue_severity(Severity s) { return s == Severity::error ? "error" : "warning"; }

// Records of `manifest` that have a row in `features`, with their labels.
struct FeaturedView {
    std::vector<std::size_t> record_index;
    Manifest records;
    std::optional<FeatureSet> features;
    std::vector<double> labels;
};

FeaturedView featured_subset(const Manifest& manifest, const FeatureSet& features) {
    FeaturedView v;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (const auto row = features.find(manifest[i].id)) {
            v.record_index.push_back(i);
            v.records.push_back(manifest[i]);
            v.labels.push_back(manifest[i].label);
            rows.push_back(*row);
        }
    }
    if (!rows.empty()) v.features = features.subset(rows);
    return v;
}

ojson analysis_json(const FeaturedView& view, const PipelineConfig& c) {
    if (!view.features) return nullptr;
    const auto stats = bound::estimate_cluster_structure(*view.features, view.labels, c.t_df, c.t_g);
    ojson out;
    out["clusters"] = to_json(stats);
    out["bound"] = to_json(bound::generalization_bound(stats.m, stats.eta, c.delta, c.rad));
    return out;
}

template <typename Fn>
auto run_stage(const std::string& name, std::vector<StageTiming>& timings, Fn&& fn) {
    Timer t;
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            timings.push_back({name, t.seconds()});
        } else {
            auto r = fn();
            timings.push_back({name, t.seconds()});
            return r;
        }
    } catch (const StageFailure&) {
        throw;
    } catch (const Error& e) {
        throw StageFailure(name, e);
    } catch (const std::exception& e) {
        throw StageFailure(name, Error(ErrorCode::io, e.what()));
    }
}

} // namespace

ValidationFailure::ValidationFailure(std::vector<ValidationIssue> issues)
    : Error(ErrorCode::invalid_config,
            "input validation failed with " + std::to_string(issues.size()) + " issue(s)" +
                (issues.empty() ? std::string() : ": " + issues.front().message)),
      issues_(std::move(issues)) {}

StageFailure::StageFailure(std::string stage, const Error& cause)
    : Error(cause.code(), "stage " + stage + " failed: " + cause.what()), stage_(std::move(stage)) {}

PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_config, "pipeline config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!kKnownConfigKeys.count(it.key())) {
            throw Error(ErrorCode::invalid_config, "unknown config key '" + it.key() + "'");
        }
    }
    PipelineConfig c;
    c.train_manifest = resolve(j, "train_manifest", base_dir);
    c.train_ref_features = resolve(j, "train_ref_features", base_dir);
    c.candidate_features = resolve(j, "candidate_features", base_dir);
    c.candidate_images = resolve(j, "candidate_images", base_dir);
    c.record_features = resolve(j, "record_features", base_dir);
    c.output_dir = resolve(j, "output_dir", base_dir);
    read_field(j, "k", c.k);
    read_field(j, "t_rf", c.t_rf);
    read_field(j, "t_df", c.t_df);
    read_field(j, "t_g", c.t_g);
    read_field(j, "t_u", c.t_u);
    read_field(j, "levels", c.levels);
    read_field(j, "metric", c.metric);
    read_field(j, "delta", c.delta);
    read_field(j, "rad", c.rad);
    read_field(j, "seed", c.seed);
    read_field(j, "paper_literal", c.paper_literal);
    read_field(j, "cap_candidates", c.cap_candidates);
    if (const auto st = j.find("stages"); st != j.end()) {
        if (!st->is_object()) throw Error(ErrorCode::invalid_config, "config 'stages' must be an object");
        read_field(*st, "select", c.stage_select);
        read_field(*st, "gensyn", c.stage_gensyn);
        read_field(*st, "downsample", c.stage_downsample);
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    const auto j = read_json(path);
    return config_from_json(j, fs::absolute(path).parent_path());
}

ojson canonical_json(const PipelineConfig& c) {
    ojson j;
    j["train_manifest"] = path_string(c.train_manifest);
    j["train_ref_features"] = path_string(c.train_ref_features);
    j["candidate_features"] = path_string(c.candidate_features);
    j["candidate_images"] = path_string(c.candidate_images);
    j["record_features"] = path_string(c.record_features);
    j["k"] = c.k;
    j["t_rf"] = c.t_rf;
    j["t_df"] = c.t_df;
    j["t_g"] = c.t_g;
    j["t_u"] = c.t_u;
    j["levels"] = c.levels;
    j["metric"] = c.metric;
    j["delta"] = c.delta;
    j["rad"] = c.rad;
    j["seed"] = c.seed;
    j["paper_literal"] = c.paper_literal;
    j["cap_candidates"] = c.cap_candidates;
    j["stages"] = {{"select", c.stage_select}, {"gensyn", c.stage_gensyn}, {"downsample", c.stage_downsample}};
    return j;
}

std::string config_hash(const PipelineConfig& c) {
    const std::string text = canonical_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ojson to_json(const std::vector<ValidationIssue>& issues) {
    ojson out = ojson::array();
    for (const auto& i : issues) {
        out.push_back({{"severity", issue_severity(i.severity)}, {"code", i.code}, {"message", i.message}});
    }
    return out;
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
    for (const auto& i : issues) {
        if (i.severity == Severity::error) return true;
    }
    return false;
}

std::vector<ValidationIssue> validate_inputs(const PipelineConfig& c) {
    std::vector<ValidationIssue> issues;
    const auto error = [&](std::string code, std::string msg) {
        issues.push_back({Severity::error, std::move(code), std::move(msg)});
    };
    const auto warn = [&](std::string code, std::string msg) {
        issues.push_back({Severity::warning, std::move(code), std::move(msg)});
    };

    if (c.k < 1) error("parameter", "k must be >= 1");
    if (!(c.t_rf > 0.0)) error("parameter", "t_rf must be > 0");
    if (!(c.t_df > 0.0)) error("parameter", "t_df must be > 0");
    if (!(c.t_g > 0.0)) error("parameter", "t_g must be > 0");
    if (c.t_u < 1) error("parameter", "t_u must be >= 1");
    if (c.levels.empty()) error("parameter", "levels must not be empty");
    for (int l : c.levels) {
        if (l < kMinLevel || l > kMaxLevel) error("parameter", "level " + std::to_string(l) + " outside [1,5]");
    }
    if (c.metric != "cosine") error("parameter", "unsupported metric '" + c.metric + "' (only cosine)");
    if (!(c.delta > 0.0 && c.delta < 1.0)) error("parameter", "delta must lie in (0,1)");
    if (!(c.rad >= 0.0)) error("parameter", "rad must be >= 0");

    const bool need_refs = c.stage_select || c.stage_gensyn;
    const auto load_fset = [&](const fs::path& p, const char* what, bool required) -> std::optional<FeatureSet> {
        if (p.empty()) {
            if (required) error("missing_input", std::string(what) + " path is required");
            return std::nullopt;
        }
        if (!fs::exists(p)) {
            error("missing_input", std::string(what) + " not found: " + p.string());
            return std::nullopt;
        }
        try {
            return load_features(p);
        } catch (const Error& e) {
            error("invalid_features", std::string(what) + ": " + e.what());
            return std::nullopt;
        }
    };

    std::optional<Manifest> manifest;
    if (c.train_manifest.empty()) {
        error("missing_input", "train_manifest path is required");
    } else if (!fs::exists(c.train_manifest)) {
        error("missing_input", "train_manifest not found: " + c.train_manifest.string());
    } else {
        try {
            manifest = read_manifest(c.train_manifest);
        } catch (const Error& e) {
            error("invalid_manifest", e.what());
        }
    }
    const auto refs = load_fset(c.train_ref_features, "train_ref_features", need_refs);
    const auto cands = load_fset(c.candidate_features, "candidate_features", need_refs);
    const auto records = load_fset(c.record_features, "record_features", c.stage_downsample);

    if (refs && cands && refs->dim() != cands->dim()) {
        error("dimension_mismatch", "train_ref_features dim " + std::to_string(refs->dim()) +
                                        " vs candidate_features dim " + std::to_string(cands->dim()));
    }
    if (need_refs && refs && refs->size() < 2) error("parameter", "need at least 2 training references");
    if (c.stage_gensyn && refs && c.k > refs->size()) {
        error("parameter", "k=" + std::to_string(c.k) + " exceeds " + std::to_string(refs->size()) +
                               " training references");
    }

    if (manifest && refs) {
        std::unordered_set<std::string> ref_ids;
        for (const auto& r : *manifest) ref_ids.insert(r.ref_id);
        for (const auto& id : refs->ids()) {
            if (!ref_ids.count(id)) warn("orphan_id", "training reference '" + id + "' has no manifest records");
        }
        if (c.stage_gensyn) {
            std::set<std::tuple<std::string, std::string, int>> have;
            for (const auto& r : *manifest) {
                if (r.is_distorted()) have.emplace(r.ref_id, r.dist_type, r.dist_level);
            }
            for (const auto& id : refs->ids()) {
                for (auto t : kDistortionRegistry) {
                    for (int l : c.levels) {
                        if (!have.count({id, std::string(to_string(t)), l})) {
                            error("missing_label", "manifest missing (ref " + id + ", " + std::string(to_string(t)) +
                                                       ", level " + std::to_string(l) + ")");
                        }
                    }
                }
            }
        }
    }

    if (c.stage_gensyn && cands) {
        if (c.candidate_images.empty() || !fs::is_directory(c.candidate_images)) {
            error("missing_input", "candidate_images directory not found: " + c.candidate_images.string());
        } else {
            for (const auto& id : cands->ids()) {
                if (!fs::exists(c.candidate_images / (id + ".ppm"))) {
                    error("missing_image", "no image for candidate '" + id + "' in " + c.candidate_images.string());
                }
            }
        }
    }
    if (manifest && cands && c.stage_gensyn) {
        std::unordered_set<std::string> ids;
        for (const auto& r : *manifest) ids.insert(r.id);
        for (const auto& id : cands->ids()) {
            if (ids.count(id)) error("id_collision", "candidate id '" + id + "' already used by a manifest record");
        }
    }

    if (manifest && records) {
        std::unordered_set<std::string> ids;
        for (const auto& r : *manifest) {
            ids.insert(r.id);
            if (c.stage_downsample && !records->find(r.id)) {
                error("id_misalignment", "manifest record '" + r.id + "' has no row in record_features");
            }
        }
        for (const auto& id : records->ids()) {
            if (!ids.count(id)) warn("orphan_id", "record_features id '" + id + "' is absent from the manifest");
        }
    }
    return issues;
}

PipelineResult run_pipeline(const PipelineConfig& c) {
    auto issues = validate_inputs(c);
    if (has_errors(issues)) throw ValidationFailure(std::move(issues));
    if (c.output_dir.empty()) {
        throw ValidationFailure({{Severity::error, "missing_output", "output_dir is required"}});
    }

    fs::create_directories(c.output_dir);
    const fs::path staging = c.output_dir / kStagingName;
    fs::remove_all(staging);
    fs::create_directories(staging);

    PipelineResult result;
    try {
        const Manifest input = read_manifest(c.train_manifest);
        std::optional<FeatureSet> refs, cands, record_feats;
        if (!c.train_ref_features.empty()) refs = load_features(c.train_ref_features);
        if (!c.candidate_features.empty()) cands = load_features(c.candidate_features);
        if (!c.record_features.empty()) record_feats = load_features(c.record_features);

        ojson stages = ojson::object();

        // select
        std::vector<std::string> selected;
        if (c.stage_select) {
            const auto sel = run_stage("select", result.timings, [&] {
                return ddcup::select_diverse_candidates(*refs, *cands, {c.cap_candidates});
            });
            selected = sel.selected_ids;
            write_json(staging / "selection.json", to_json(sel));
            stages["select"] = {{"ran", true},
                                {"candidates", cands->size()},
                                {"selected", sel.selected_ids.size()},
                                {"rejected", sel.rejected.size()},
                                {"dropped_by_cap", sel.dropped_by_cap.size()},
                                {"median", sel.stats.median},
                                {"max", sel.stats.max}};
        } else {
            stages["select"] = {{"ran", false}};
            // Without selection every candidate is treated as a new reference.
            if (c.stage_gensyn) selected = cands->ids();
        }
        result.refs_selected = c.stage_select ? selected.size() : 0;

        // gensyn
        Manifest combined = input;
        if (c.stage_gensyn && !selected.empty()) {
            auto gen = run_stage("gensyn", result.timings, [&] {
                std::vector<std::size_t> rows;
                for (const auto& id : selected) rows.push_back(*cands->find(id));
                const FeatureSet new_refs = cands->subset(rows);
                syngen::GenSynConfig g;
                g.k = c.k;
                g.t_rf = c.t_rf;
                g.levels = c.levels;
                g.rule = c.paper_literal ? syngen::NeighborRule::paper_literal : syngen::NeighborRule::corrected;
                g.seed = c.seed;
                g.new_ref_image_dir = c.candidate_images;
                g.output_root = staging;
                return syngen::generate_synthetic(input, *refs, new_refs, g);
            });
            write_manifest(staging / "gensyn.jsonl", gen.records);
            ojson assignments = ojson::array();
            for (const auto& a : gen.assignments) assignments.push_back(to_json(a));
            write_json(staging / "neighbors.json", assignments);
            combined.insert(combined.end(), gen.records.begin(), gen.records.end());
            validate_manifest(combined);
            result.records_generated = gen.distorted_count;
            result.references_added = gen.reference_count;
            stages["gensyn"] = {{"ran", true},
                                {"records_generated", gen.distorted_count},
                                {"references_added", gen.reference_count}};
        } else {
            stages["gensyn"] = {{"ran", c.stage_gensyn}, {"records_generated", 0}, {"references_added", 0}};
        }

        // downsample
        Manifest output = combined;
        std::size_t passthrough = 0;
        if (c.stage_downsample) {
            const auto view = featured_subset(combined, *record_feats);
            passthrough = combined.size() - view.records.size();
            const auto down = run_stage("downsample", result.timings, [&] {
                drcdown::DrcDownResult r;
                if (view.features) {
                    r = drcdown::drcdown(*view.features, view.records, {c.t_df, c.t_g, c.t_u}, c.seed);
                }
                return r;
            });
            std::vector<bool> keep(combined.size(), true);
            for (auto i : view.record_index) keep[i] = false;
            for (auto k : down.kept_indices) keep[view.record_index[k]] = true;
            output.clear();
            for (std::size_t i = 0; i < combined.size(); ++i) {
                if (keep[i]) output.push_back(combined[i]);
            }
            result.records_removed = combined.size() - output.size();
            auto rep = to_json(down.report);
            rep["unfeatured_passthrough"] = passthrough;
            write_json(staging / "downsample_report.json", rep);
            stages["downsample"] = {{"ran", true},
                                    {"records_removed", result.records_removed},
                                    {"clusters_thinned", down.report.clusters_thinned},
                                    {"unfeatured_passthrough", passthrough}};
        } else {
            stages["downsample"] = {{"ran", false}, {"records_removed", 0}};
        }
        result.output_records = output.size();
        write_manifest(staging / "manifest.jsonl", output);

        // analyze
        ojson analysis;
        run_stage("analyze", result.timings, [&] {
            if (record_feats) {
                analysis["before"] = analysis_json(featured_subset(input, *record_feats), c);
                analysis["after"] = analysis_json(featured_subset(output, *record_feats), c);
            } else {
                analysis["before"] = nullptr;
                analysis["after"] = nullptr;
            }
        });

        ojson& rep = result.report;
        rep["toolkit_version"] = kVersion;
        rep["config_hash"] = config_hash(c);
        rep["seed"] = c.seed;
        rep["counts"] = {{"refs_selected", result.refs_selected},
                         {"records_generated", result.records_generated},
                         {"references_added", result.references_added},
                         {"records_removed", result.records_removed}};
        rep["sizes"] = {{"input_records", input.size()},
                        {"after_gensyn", combined.size()},
                        {"output_records", output.size()}};
        rep["stages"] = std::move(stages);
        rep["analysis"] = std::move(analysis);
        rep["warnings"] = to_json(issues);
        write_json(staging / "report.json", rep);

        ojson timings = ojson::array();
        for (const auto& t : result.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
        write_json(staging / "timings.json", timings);

        // Publish: replace same-named outputs in output_dir.
        for (const auto& entry : fs::directory_iterator(staging)) {
            const fs::path dest = c.output_dir / entry.path().filename();
            fs::remove_all(dest);
            fs::rename(entry.path(), dest);
        }
        fs::remove_all(staging);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
    return result;
}

} // namespace syndr::pipeline
