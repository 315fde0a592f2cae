// Regenerates tests/data: the tiny pipeline fixture and the two test images.
//   make_fixture <tests/data dir>
// Output is fully determined by the constants below.

#include "syndr/ddcup.hpp"
#include "syndr/distortion.hpp"
#include "syndr/features.hpp"
#include "syndr/image.hpp"
#include "syndr/manifest.hpp"
#include "syndr/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace syndr;

namespace {

constexpr std::size_t kDim = 16;
constexpr std::size_t kRefs = 8;
constexpr std::size_t kCandidates = 8;
constexpr std::size_t kDuplicates = 20;
constexpr std::uint64_t kBaseSeed = 20240601;

std::vector<float> gaussian_vector(BoxMuller& g, std::size_t d) {
    std::vector<float> v(d);
    for (auto& x : v) x = static_cast<float>(g.next());
    return v;
}

// Smooth gradients, a few sinusoids and mild grain: enough texture for
// blur and DCT quantization to bite.
Image natural_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const double fx = 0.05 + 0.15 * rng.next_unit();
    const double fy = 0.05 + 0.15 * rng.next_unit();
    const double phase = 6.283185307179586 * rng.next_unit();
    Image img(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double base = 40.0 + 140.0 * static_cast<double>(x + y) / static_cast<double>(w + h);
            const double wave = 45.0 * std::sin(fx * x + phase) * std::cos(fy * y);
            const bool edge = ((x / 12) + (y / 12)) % 2 == 0;
            for (std::size_t c = 0; c < Image::channels; ++c) {
                double v = base + wave + (edge ? 25.0 : -25.0) + 10.0 * static_cast<double>(c);
                v += 12.0 * (rng.next_unit() - 0.5);
                img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
            }
        }
    }
    return img;
}

double base_quality(std::size_t ref) { return 7.0 + 0.25 * static_cast<double>(ref); }

double mos(std::size_t ref, std::size_t type, int level) {
    const double drop = (0.9 + 0.1 * static_cast<double>(type)) * level;
    return std::round((base_quality(ref) - drop) * 1000.0) / 1000.0;
}

// Searches seeds until the candidate pool yields at least two selections.
std::pair<FeatureSet, FeatureSet> reference_features() {
    for (std::uint64_t attempt = 0;; ++attempt) {
        BoxMuller g(kBaseSeed + attempt);
        std::vector<FeatureVector> refs, cands;
        for (std::size_t i = 0; i < kRefs; ++i) refs.push_back({"r" + std::to_string(i), gaussian_vector(g, kDim)});
        for (std::size_t i = 0; i < kCandidates; ++i)
            cands.push_back({"n" + std::to_string(i), gaussian_vector(g, kDim)});
        FeatureSet r(kDim, std::move(refs)), c(kDim, std::move(cands));
        if (ddcup::select_diverse_candidates(r, c).selected_ids.size() >= 2) {
            std::cerr << "fixture seed offset " << attempt << "\n";
            return {std::move(r), std::move(c)};
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixture <tests/data dir>\n";
        return 2;
    }
    const fs::path root = argv[1];
    const fs::path tiny = root / "tiny";
    fs::create_directories(tiny / "candidates");
    fs::create_directories(root / "images");

    write_ppm(root / "images" / "natural_a.ppm", natural_image(64, 48, 11));
    write_ppm(root / "images" / "natural_b.ppm", natural_image(48, 64, 29));

    auto [refs, cands] = reference_features();
    write_features(tiny / "refs.fset", refs);
    write_features(tiny / "candidates.fset", cands);
    for (std::size_t i = 0; i < cands.size(); ++i)
        write_ppm(tiny / "candidates" / (cands.id(i) + ".ppm"), natural_image(32, 32, 100 + i));

    Manifest manifest;
    std::vector<FeatureVector> record_feats;
    BoxMuller g(kBaseSeed ^ 0x5eedULL);
    for (std::size_t r = 0; r < kRefs; ++r) {
        for (std::size_t t = 0; t < kDistortionRegistry.size(); ++t) {
            for (int level = kMinLevel; level <= kMaxLevel; ++level) {
                ManifestRecord rec;
                rec.ref_id = refs.id(r);
                rec.dist_type = std::string(to_string(kDistortionRegistry[t]));
                rec.dist_level = level;
                rec.id = rec.ref_id + "__" + rec.dist_type + "__" + std::to_string(level);
                rec.image_path = "images/" + rec.id + ".ppm";
                rec.label = mos(r, t, level);
                manifest.push_back(rec);
                record_feats.push_back({rec.id, gaussian_vector(g, kDim)});
            }
        }
    }
    // Near-duplicates of the first record: one dense cluster of 21.
    const ManifestRecord anchor = manifest.front();
    const auto anchor_feat = record_feats.front().values;
    for (std::size_t i = 0; i < kDuplicates; ++i) {
        ManifestRecord rec = anchor;
        rec.ref_id = (i < 10 ? "d0" : "d") + std::to_string(i);
        rec.id = rec.ref_id + "__gaussian_blur__1";
        rec.image_path = "images/" + rec.id + ".ppm";
        manifest.push_back(rec);
        auto v = anchor_feat;
        for (auto& x : v) x += static_cast<float>(0.002 * g.next());
        record_feats.push_back({rec.id, std::move(v)});
    }
    write_manifest(tiny / "train.jsonl", manifest);
    write_features(tiny / "records.fset", FeatureSet(kDim, std::move(record_feats)));

    nlohmann::ordered_json config;
    config["train_manifest"] = "train.jsonl";
    config["train_ref_features"] = "refs.fset";
    config["candidate_features"] = "candidates.fset";
    config["candidate_images"] = "candidates";
    config["record_features"] = "records.fset";
    config["output_dir"] = "out";
    config["k"] = 5;
    config["t_rf"] = 0.05;
    config["t_df"] = 0.1;
    config["t_g"] = 1.0;
    config["t_u"] = 5;
    config["levels"] = {1, 3, 5};
    config["delta"] = 0.05;
    config["seed"] = 42;
    std::ofstream(tiny / "pipeline.json") << config.dump(2) << '\n';
    return 0;
}
