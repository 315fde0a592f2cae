// syndr: dataset reshaping toolkit for synthetic image-quality data.

#include "syndr/bound.hpp"
#include "syndr/ddcup.hpp"
#include "syndr/distortion.hpp"
#include "syndr/drcdown.hpp"
#include "syndr/features.hpp"
#include "syndr/json_io.hpp"
#include "syndr/manifest.hpp"
#include "syndr/pipeline.hpp"
#include "syndr/syngen.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace syndr;
using pipeline::kExitOk;
using pipeline::kExitStage;
using pipeline::kExitValidation;

namespace {

// Input loading failures map to exit code 2; anything after that to 3.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Fn>
auto load(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

std::vector<int> parse_levels(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw InputError("invalid level list: " + text);
        }
    }
    return out;
}

int cmd_distort(const fs::path& in, const std::string& type, int level, std::uint64_t seed, const fs::path& out) {
    const auto image = load([&] { return read_ppm(in); });
    const auto t = parse_distortion_type(type);
    if (!t) throw InputError("unknown distortion type '" + type + "'");
    if (level < kMinLevel || level > kMaxLevel) throw InputError("level must be in [1,5]");
    write_ppm(out, apply_distortion(image, {*t, level, seed}));
    std::cout << "severity (MSE) " << severity(read_ppm(out), image) << "\n";
    return kExitOk;
}

int cmd_select(const fs::path& refs_path, const fs::path& cands_path, bool no_cap, const fs::path& out) {
    const auto refs = load([&] { return load_features(refs_path); });
    const auto cands = load([&] { return load_features(cands_path); });
    const auto result = ddcup::select_diverse_candidates(refs, cands, {!no_cap});
    write_json(out, to_json(result));
    std::cout << "selected " << result.selected_ids.size() << " of " << cands.size() << " candidates\n";
    return kExitOk;
}

struct GensynArgs {
    fs::path manifest, train_refs, new_refs, images, out, image_root;
    std::size_t k = 5;
    double t_rf = 0.05;
    std::string levels = "1,3,5";
    std::uint64_t seed = 0;
    bool paper_literal = false;
    bool labels_only = false;
};

int cmd_gensyn(const GensynArgs& a) {
    const auto manifest = load([&] { return read_manifest(a.manifest); });
    const auto refs = load([&] { return load_features(a.train_refs); });
    const auto news = load([&] { return load_features(a.new_refs); });
    syngen::GenSynConfig g;
    g.k = a.k;
    g.t_rf = a.t_rf;
    g.levels = parse_levels(a.levels);
    g.seed = a.seed;
    g.rule = a.paper_literal ? syngen::NeighborRule::paper_literal : syngen::NeighborRule::corrected;
    g.new_ref_image_dir = a.images;
    if (!a.labels_only) g.output_root = a.image_root.empty() ? fs::absolute(a.out).parent_path() : a.image_root;
    const auto result = syngen::generate_synthetic(manifest, refs, news, g);
    write_manifest(a.out, result.records);
    std::cout << "generated " << result.distorted_count << " records for " << result.reference_count
              << " new references\n";
    return kExitOk;
}

struct DownsampleArgs {
    fs::path manifest, features, out, report;
    double t_df = 0.1, t_g = 1.0;
    std::size_t t_u = 20;
    std::uint64_t seed = 0;
};

int cmd_downsample(const DownsampleArgs& a) {
    const auto manifest = load([&] { return read_manifest(a.manifest); });
    const auto feats = load([&] { return load_features(a.features); });
    const auto result = drcdown::drcdown(feats, manifest, {a.t_df, a.t_g, a.t_u}, a.seed);
    write_manifest(a.out, result.kept);
    if (!a.report.empty()) write_json(a.report, to_json(result.report));
    std::cout << "kept " << result.report.n_after << " of " << result.report.n_before << " records\n";
    return kExitOk;
}

struct AnalyzeArgs {
    fs::path manifest, features, out;
    double t_df = 0.1, t_g = 1.0, delta = 0.05, rad = 0.0;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const auto manifest = load([&] { return read_manifest(a.manifest); });
    const auto feats = load([&] { return load_features(a.features); });
    std::vector<std::size_t> rows;
    std::vector<double> labels;
    for (const auto& r : manifest) {
        const auto row = feats.find(r.id);
        if (!row) throw InputError("record '" + r.id + "' has no feature row");
        rows.push_back(*row);
        labels.push_back(r.label);
    }
    const auto aligned = feats.subset(rows);
    const auto stats = bound::estimate_cluster_structure(aligned, labels, a.t_df, a.t_g);
    const auto report = bound::generalization_bound(stats.m, stats.eta, a.delta, a.rad);
    ojson out;
    out["clusters"] = to_json(stats);
    out["bound"] = to_json(report);
    write_json(a.out, out);
    std::cout << "m=" << stats.m << " eta=" << stats.eta << " bound=" << report.total
              << (report.data_terms_only ? " (data terms only)" : "") << "\n";
    return kExitOk;
}

int cmd_validate_bound(const fs::path& config_path, std::uint64_t seed, const fs::path& out) {
    std::vector<bound::ExperimentConfig> configs;
    load([&] {
        if (config_path.empty()) {
            configs.emplace_back();
            configs.emplace_back().axis = bound::SweepAxis::eta;
            return 0;
        }
        const auto j = read_json(config_path);
        if (const auto sweeps = j.find("sweeps"); sweeps != j.end()) {
            for (const auto& s : *sweeps) configs.push_back(experiment_config_from_json(s));
        } else {
            configs.push_back(experiment_config_from_json(j));
        }
        return 0;
    });
    ojson reports = ojson::array();
    for (const auto& c : configs) {
        const auto r = bound::run_bound_experiment(c, seed);
        std::cout << "sweep " << bound::to_string(r.axis) << ": rank correlation " << r.rank_correlation << "\n";
        reports.push_back(to_json(r));
    }
    write_json(out, {{"seed", seed}, {"sweeps", reports}});
    return kExitOk;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, const fs::path& out) {
    auto config = load([&] { return pipeline::load_config(config_path); });
    if (seed) config.seed = *seed;
    if (!out.empty()) config.output_dir = fs::absolute(out).lexically_normal();
    try {
        const auto result = pipeline::run_pipeline(config);
        std::cout << "selected " << result.refs_selected << ", generated " << result.records_generated
                  << ", removed " << result.records_removed << ", output " << result.output_records
                  << " records -> " << config.output_dir.string() << "\n";
        return kExitOk;
    } catch (const pipeline::ValidationFailure& e) {
        std::cerr << to_json(e.issues()).dump(2) << "\n";
        throw InputError(e.what());
    }
}

int cmd_validate(const fs::path& config_path) {
    const auto config = load([&] { return pipeline::load_config(config_path); });
    const auto issues = pipeline::validate_inputs(config);
    std::cout << to_json(issues).dump(2) << "\n";
    return pipeline::has_errors(issues) ? kExitValidation : kExitOk;
}

int cmd_inspect(const fs::path& path) {
    const auto set = load([&] { return load_features(path); });
    std::cout << ojson{{"rows", set.size()}, {"dim", set.dim()}, {"issues", ojson::array()}}.dump() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"syndr: reshape synthetic image-quality datasets"};
    app.set_version_flag("--version", pipeline::kVersion);
    app.require_subcommand(1);

    fs::path d_in, d_out;
    std::string d_type;
    int d_level = 1;
    std::uint64_t d_seed = 0;
    auto* distort = app.add_subcommand("distort", "apply one registered distortion to a PPM image");
    distort->add_option("--in", d_in, "input image (binary PPM)")->required();
    distort->add_option("--type", d_type, "gaussian_blur | white_noise | contrast_decrease | dct_quantization")
        ->required();
    distort->add_option("--level", d_level, "severity level 1..5")->required();
    distort->add_option("--seed", d_seed, "noise seed");
    distort->add_option("--out", d_out, "output image")->required();

    fs::path s_refs, s_cands, s_out;
    bool s_no_cap = false;
    auto* select = app.add_subcommand("select", "pick diverse new references from a candidate pool");
    select->add_option("--train-refs", s_refs)->required();
    select->add_option("--candidates", s_cands)->required();
    select->add_option("--out", s_out)->required();
    select->add_flag("--no-cap", s_no_cap, "do not truncate the candidate pool to the reference count");

    GensynArgs g;
    auto* gensyn = app.add_subcommand("gensyn", "synthesize distorted images with kNN pseudo-labels");
    gensyn->add_option("--manifest", g.manifest)->required();
    gensyn->add_option("--train-refs", g.train_refs)->required();
    gensyn->add_option("--new-refs", g.new_refs)->required();
    gensyn->add_option("--images", g.images, "directory with <new_ref_id>.ppm")->required();
    gensyn->add_option("--out", g.out)->required();
    gensyn->add_option("--image-root", g.image_root, "where images/ is created (default: --out's directory)");
    gensyn->add_option("--k", g.k);
    gensyn->add_option("--t-rf", g.t_rf);
    gensyn->add_option("--levels", g.levels);
    gensyn->add_option("--seed", g.seed);
    gensyn->add_flag("--paper-literal", g.paper_literal, "use the neighbor filter and softmax exactly as printed");
    gensyn->add_flag("--labels-only", g.labels_only, "skip image synthesis");

    DownsampleArgs ds;
    auto* downsample = app.add_subcommand("downsample", "thin redundant high-density clusters");
    downsample->add_option("--manifest", ds.manifest)->required();
    downsample->add_option("--features", ds.features)->required();
    downsample->add_option("--t-df", ds.t_df);
    downsample->add_option("--t-g", ds.t_g);
    downsample->add_option("--t-u", ds.t_u);
    downsample->add_option("--seed", ds.seed);
    downsample->add_option("--out", ds.out)->required();
    downsample->add_option("--report", ds.report);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "cluster structure and generalization-bound terms");
    analyze->add_option("--manifest", an.manifest)->required();
    analyze->add_option("--features", an.features)->required();
    analyze->add_option("--t-df", an.t_df);
    analyze->add_option("--t-g", an.t_g);
    analyze->add_option("--delta", an.delta);
    analyze->add_option("--rad", an.rad);
    analyze->add_option("--out", an.out)->required();

    fs::path vb_config, vb_out;
    std::uint64_t vb_seed = 7;
    auto* validate_bound = app.add_subcommand("validate-bound", "empirical trend check of the bound");
    validate_bound->add_option("--config", vb_config, "experiment JSON (default: both sweeps)");
    validate_bound->add_option("--seed", vb_seed);
    validate_bound->add_option("--out", vb_out)->required();

    fs::path r_config, r_out;
    std::optional<std::uint64_t> r_seed;
    auto* run = app.add_subcommand("run", "end-to-end pipeline");
    run->add_option("--config", r_config)->required();
    run->add_option("--seed", r_seed);
    run->add_option("--out", r_out);

    fs::path v_config;
    auto* validate = app.add_subcommand("validate", "check pipeline inputs without running");
    validate->add_option("--config", v_config)->required();

    fs::path i_features;
    auto* inspect = app.add_subcommand("inspect", "load and validate a feature file");
    inspect->add_option("--features", i_features)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*distort) return cmd_distort(d_in, d_type, d_level, d_seed, d_out);
        if (*select) return cmd_select(s_refs, s_cands, s_no_cap, s_out);
        if (*gensyn) return cmd_gensyn(g);
        if (*downsample) return cmd_downsample(ds);
        if (*analyze) return cmd_analyze(an);
        if (*validate_bound) return cmd_validate_bound(vb_config, vb_seed, vb_out);
        if (*run) return cmd_run(r_config, r_seed, r_out);
        if (*validate) return cmd_validate(v_config);
        if (*inspect) return cmd_inspect(i_features);
    } catch (const InputError& e) {
        std::cerr << "syndr: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "syndr: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitStage;
}
