#include "oracles.hpp"

#include "syndr/drcdown.hpp"
#include "syndr/error.hpp"
#include "syndr/manifest.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace syndr;

namespace {

const std::filesystem::path kTiny = std::filesystem::path(SYNDR_TEST_DATA) / "tiny";

} // namespace

TEST(Drcdown, PairsMatchBruteForce) {
    std::size_t total = 0;
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto inst = oracle::clustered_instance(s, 20 + 13 * s, 6);
        const auto got = drcdown::find_similar_pairs(inst.features, inst.labels, 0.1, 1.0);
        const auto want = oracle::similar_pairs(inst.features, inst.labels, 0.1, 1.0);
        EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
        EXPECT_EQ(std::set(got.begin(), got.end()), want);
        EXPECT_EQ(got.size(), want.size());
        total += got.size();
    }
    EXPECT_GT(total, 100u);
}

TEST(Drcdown, GatesAreStrict) {
    const FeatureSet f(2, {{"a", {1, 0}}, {"b", {1, 0}}, {"c", {1, 0}}});
    const std::vector<double> labels{1.0, 2.0, 1.5};
    // |1-2| = 1 is not < 1; the others differ by exactly 0.5.
    EXPECT_EQ(drcdown::find_similar_pairs(f, labels, 0.1, 1.0),
              (drcdown::SimilarPairSet{{0, 2}, {1, 2}}));
    EXPECT_TRUE(drcdown::find_similar_pairs(f, labels, 0.1, 0.5).empty());
    // Thresholds must be positive.
    EXPECT_THROW(drcdown::find_similar_pairs(f, labels, 0.0, 1.0), Error);
    const std::vector<double> short_labels{1.0};
    EXPECT_THROW(drcdown::find_similar_pairs(f, short_labels, 0.1, 1.0), Error);
}

TEST(Drcdown, ClustersEqualBfsComponents) {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.next_below(60);
        std::set<std::pair<std::size_t, std::size_t>> edges;
        const std::size_t e = rng.next_below(n + 1);
        for (std::size_t k = 0; k < e && n > 1; ++k) {
            std::size_t a = rng.next_below(n), b = rng.next_below(n);
            if (a == b) continue;
            edges.emplace(std::min(a, b), std::max(a, b));
        }
        const drcdown::SimilarPairSet pairs(edges.begin(), edges.end());
        const auto p = drcdown::cluster_pairs(pairs, n);
        const auto want = oracle::components(pairs, n);
        EXPECT_EQ(p.members, want);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& comp : want) {
                if (std::find(comp.begin(), comp.end(), i) != comp.end()) {
                    EXPECT_EQ(p.cluster_of[i], comp.front());
                }
            }
        }
    }
    EXPECT_THROW(drcdown::cluster_pairs({{0, 5}}, 3), Error);
}

TEST(Drcdown, KeepCountFormula) {
    EXPECT_EQ(drcdown::kept_count(50, 20), 25u);
    EXPECT_EQ(drcdown::kept_count(30, 20), 30u);
    EXPECT_EQ(drcdown::kept_count(45, 20), 22u);
    EXPECT_EQ(drcdown::kept_count(60, 20), 30u);
    EXPECT_EQ(drcdown::kept_count(41, 20), 20u); // 20.5 > 20, floor 20
    EXPECT_EQ(drcdown::kept_count(40, 20), 40u);
    for (std::size_t t_u : {10u, 20u, 30u})
        for (std::size_t n = 1; n <= 200; ++n) EXPECT_EQ(drcdown::kept_count(n, t_u), oracle::kept(n, t_u)) << n;
}

TEST(Drcdown, ThinClusterIsSeededSubset) {
    std::vector<std::size_t> members(50);
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = 3 * i + 7;
    const auto a = drcdown::thin_cluster(members, 7, 20, 11);
    const auto b = drcdown::thin_cluster(members, 7, 20, 11);
    const auto c = drcdown::thin_cluster(members, 7, 20, 12);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(a.size(), 25u);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_TRUE(std::includes(members.begin(), members.end(), a.begin(), a.end()));
    EXPECT_EQ(std::set(a.begin(), a.end()).size(), a.size());
    const std::vector<std::size_t> small{1, 2, 3};
    EXPECT_EQ(drcdown::thin_cluster(small, 1, 2, 0), std::vector<std::size_t>({1, 2, 3}));
    // 3/2 > 1, so a single member survives.
    EXPECT_EQ(drcdown::thin_cluster(small, 1, 1, 0).size(), 1u);
}

TEST(Drcdown, FixtureRemovesInjectedDuplicates) {
    const auto manifest = read_manifest(kTiny / "train.jsonl");
    const auto feats = load_features(kTiny / "records.fset");
    const auto r1 = drcdown::drcdown(feats, manifest, {0.1, 1.0, 5}, 42);
    const auto r2 = drcdown::drcdown(feats, manifest, {0.1, 1.0, 5}, 42);
    EXPECT_EQ(serialize_manifest(r1.kept), serialize_manifest(r2.kept));
    EXPECT_EQ(r1.report.n_before, 180u);
    EXPECT_EQ(r1.report.n_after, 169u);
    EXPECT_EQ(r1.report.clusters_thinned, 1u);
    EXPECT_EQ(r1.report.size_histogram_before.at(21), 1u);
    EXPECT_EQ(r1.report.size_histogram_after.at(10), 1u);
    // 159 singletons + 1/21 over 160 clusters, then + 1/10.
    EXPECT_NEAR(r1.report.eta_before, (oracle::Rational(159) + oracle::Rational(1, 21)).convert_to<double>() / 160,
                1e-15);
    EXPECT_NEAR(r1.report.eta_after, (159 + 0.1) / 160, 1e-15);
    EXPECT_TRUE(std::is_sorted(r1.kept_indices.begin(), r1.kept_indices.end()));
    // With the default T_u = 20 the cluster of 21 is left alone.
    EXPECT_EQ(drcdown::drcdown(feats, manifest, {}, 42).report.n_after, 180u);
}

TEST(Drcdown, DeterministicAcrossSeedsAndRuns) {
    const auto inst = oracle::clustered_instance(77, 400, 4);
    Manifest m;
    for (std::size_t i = 0; i < inst.features.size(); ++i) {
        ManifestRecord r;
        r.id = inst.features.id(i);
        r.ref_id = r.id;
        r.image_path = r.id + ".ppm";
        r.dist_type = "gaussian_blur";
        r.dist_level = 1;
        r.label = inst.labels[i];
        m.push_back(r);
    }
    const auto a = drcdown::drcdown(inst.features, m, {0.1, 1.0, 3}, 5);
    const auto b = drcdown::drcdown(inst.features, m, {0.1, 1.0, 3}, 5);
    EXPECT_EQ(a.kept_indices, b.kept_indices);
    EXPECT_LT(a.report.n_after, a.report.n_before);
}

TEST(Drcdown, MisalignedInputsRejected) {
    const auto manifest = read_manifest(kTiny / "train.jsonl");
    const auto feats = load_features(kTiny / "records.fset");
    std::vector<std::size_t> rows(feats.size() - 1);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    try {
        drcdown::drcdown(feats.subset(rows), manifest, {}, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::id_misalignment);
    }
    auto renamed = manifest;
    renamed[3].id = "not_in_features";
    EXPECT_THROW(drcdown::drcdown(feats, renamed, {}, 0), Error);
    EXPECT_TRUE(drcdown::drcdown(FeatureSet{}, Manifest{}, {}, 0).kept.empty());
}

TEST(Drcdown, SmallExamples) {
    const FeatureSet twins(2, {{"a", {1, 1}}, {"b", {1, 1}}});
    const std::vector<double> same{4.0, 4.0};
    EXPECT_EQ(drcdown::find_similar_pairs(twins, same, 0.1, 1.0).size(), 1u);
    const FeatureSet apart(2, {{"a", {1, 0}}, {"b", {0.5f, std::sqrt(3.0f) / 2}}});
    EXPECT_TRUE(drcdown::find_similar_pairs(apart, same, 0.1, 100.0).empty());

    const auto p = drcdown::cluster_pairs({{0, 1}, {1, 2}, {3, 4}}, 6);
    EXPECT_EQ(p.members, (std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3, 4}, {5}}));
    EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{3, 2, 1}));
    EXPECT_EQ(p.m(), 3u);
    EXPECT_EQ(drcdown::cluster_pairs({}, 4).m(), 4u);
}

TEST(Drcdown, FixedPointAndSixtyCopies) {
    auto make = [](std::size_t n, bool copies) {
        std::vector<FeatureVector> rows;
        Manifest m;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string id = "x" + std::to_string(i);
            std::vector<float> v(n, 0.f);
            if (copies) v.assign(n, 1.f);
            else v[i] = 1.f;
            rows.push_back({id, v});
            ManifestRecord r;
            r.id = id;
            r.ref_id = id;
            r.image_path = id + ".ppm";
            r.dist_type = "white_noise";
            r.dist_level = 2;
            r.label = 5.0;
            m.push_back(r);
        }
        return std::pair{FeatureSet(n, rows), m};
    };
    const auto [distinct, dm] = make(25, false);
    const auto fixed = drcdown::drcdown(distinct, dm, {}, 1);
    EXPECT_EQ(serialize_manifest(fixed.kept), serialize_manifest(dm));

    const auto [copies, cm] = make(60, true);
    const auto thinned = drcdown::drcdown(copies, cm, {}, 1);
    EXPECT_EQ(thinned.kept.size(), 30u);
    EXPECT_EQ(thinned.report.m, 1u);
    EXPECT_DOUBLE_EQ(thinned.report.eta_before, 1.0 / 60);
    EXPECT_DOUBLE_EQ(thinned.report.eta_after, 1.0 / 30);
    // Same kept set whatever order the records arrive in.
    Manifest reversed(cm.rbegin(), cm.rend());
    const auto again = drcdown::drcdown(copies, reversed, {}, 1);
    EXPECT_EQ(again.kept.size(), 30u);
}
