#pragma once

#include "syndr/error.hpp"
#include "syndr/json_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace syndr::pipeline {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every CLI subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitStage = 3;

struct PipelineConfig {
    std::filesystem::path train_manifest;
    std::filesystem::path train_ref_features;
    std::filesystem::path candidate_features;
    std::filesystem::path candidate_images;
    std::filesystem::path record_features; // per-record features for downsampling/analysis
    std::filesystem::path output_dir;

    std::size_t k = 5;
    double t_rf = 0.05;
    double t_df = 0.1;
    double t_g = 1.0;
    std::size_t t_u = 20;
    std::vector<int> levels = {1, 3, 5};
    std::string metric = "cosine";
    double delta = 0.05;
    double rad = 0.0;
    std::uint64_t seed = 0;
    bool paper_literal = false;
    bool cap_candidates = true;

    bool stage_select = true;
    bool stage_gensyn = true;
    bool stage_downsample = true;
};

/// Reads a JSON config. Relative paths resolve against the config file's
/// directory; unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Canonical JSON of the parameters and inputs (output_dir excluded).
ojson canonical_json(const PipelineConfig& config);
std::string config_hash(const PipelineConfig& config);

enum class Severity { error, warning };

struct ValidationIssue {
    Severity severity;
    std::string code;
    std::string message;
};

ojson to_json(const std::vector<ValidationIssue>& issues);
bool has_errors(const std::vector<ValidationIssue>& issues);

/// Read-only checks of everything run_pipeline will touch.
std::vector<ValidationIssue> validate_inputs(const PipelineConfig& config);

class ValidationFailure : public Error {
public:
    explicit ValidationFailure(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

class StageFailure : public Error {
public:
    StageFailure(std::string stage, const Error& cause);
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    ojson report;                    // byte-stable; written to report.json
    std::vector<StageTiming> timings; // written to timings.json
    std::size_t refs_selected = 0;
    std::size_t records_generated = 0;
    std::size_t references_added = 0;
    std::size_t records_removed = 0;
    std::size_t output_records = 0;
};

/// select → gensyn → downsample → analyze. Outputs land in config.output_dir
/// only on success; a failing stage leaves no partial files behind.
PipelineResult run_pipeline(const PipelineConfig& config);

} // namespace syndr::pipeline
