#include "oracles.hpp"

#include "syndr/bound.hpp"
#include "syndr/drcdown.hpp"
#include "syndr/error.hpp"
#include "syndr/json_io.hpp"
#include "syndr/manifest.hpp"

#include <gtest/gtest.h>

using namespace syndr;
using oracle::Dec50;

TEST(Bound, EtaExactValues) {
    const std::vector<std::size_t> a{1, 1, 1}, b{2, 2}, c{1, 4};
    EXPECT_EQ(bound::redundancy_heterogeneity(a), 1.0);
    EXPECT_EQ(bound::redundancy_heterogeneity(b), 0.5);
    EXPECT_EQ(bound::redundancy_heterogeneity(c), 0.625);
    EXPECT_THROW(bound::redundancy_heterogeneity(std::vector<std::size_t>{}), Error);
    EXPECT_THROW(bound::redundancy_heterogeneity(std::vector<std::size_t>{1, 0}), Error);
}

TEST(Bound, EtaMatchesRationalOracle) {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::size_t> sizes(1 + rng.next_below(300));
        for (auto& k : sizes) k = 1 + rng.next_below(rng.next_below(2) ? 3 : 500);
        const double want = oracle::eta(sizes).convert_to<double>();
        const double got = bound::redundancy_heterogeneity(sizes);
        EXPECT_NEAR(got, want, 4e-16 * want);
        EXPECT_GT(got, 0.0);
        EXPECT_LE(got, 1.0);
    }
}

TEST(Bound, ClusterStatsCounts) {
    const std::vector<std::size_t> sizes{3, 1, 6};
    const auto s = bound::cluster_stats(sizes);
    EXPECT_EQ(s.m, 3u);
    EXPECT_EQ(s.n, 10u);
    EXPECT_EQ(s.sizes, sizes);
    EXPECT_NEAR(s.eta, 0.5, 1e-16);
}

TEST(Bound, TermsAgainstHighPrecision) {
    const auto r = bound::generalization_bound(100, 1.0, 0.05, 0.0);
    const auto t = oracle::bound_terms(100, Dec50(1), Dec50("0.05"));
    EXPECT_EQ(r.term_rad, 0.0);
    EXPECT_NEAR(r.term_mcdiarmid, 0.271620, 1e-6);
    EXPECT_NEAR(r.term_bernstein_sqrt, 0.067905, 1e-6);
    EXPECT_NEAR(r.term_bernstein_lin, 0.024593, 1e-6);
    EXPECT_NEAR(r.term_mcdiarmid, t.mcdiarmid.convert_to<double>(), 1e-15);
    EXPECT_NEAR(r.term_bernstein_sqrt, t.bern_sqrt.convert_to<double>(), 1e-15);
    EXPECT_NEAR(r.term_bernstein_lin, t.bern_lin.convert_to<double>(), 1e-15);
    EXPECT_NEAR(r.total, 0.364118, 1e-6);
    EXPECT_TRUE(r.data_terms_only);

    const auto with_rad = bound::generalization_bound(100, 1.0, 0.05, 0.1);
    EXPECT_DOUBLE_EQ(with_rad.term_rad, 0.2);
    EXPECT_DOUBLE_EQ(with_rad.total, r.total + 0.2);
    EXPECT_FALSE(with_rad.data_terms_only);
}

TEST(Bound, TermsOnGridMatchOracle) {
    for (std::size_t m : {1u, 7u, 100u, 12345u}) {
        for (double eta : {0.01, 0.3, 1.0}) {
            for (const char* delta : {"0.001", "0.05", "0.5"}) {
                const auto r = bound::generalization_bound(m, eta, std::stod(delta));
                const auto t = oracle::bound_terms(m, Dec50(eta), Dec50(delta));
                EXPECT_NEAR(r.term_mcdiarmid, t.mcdiarmid.convert_to<double>(), 1e-14);
                EXPECT_NEAR(r.term_bernstein_sqrt, t.bern_sqrt.convert_to<double>(), 1e-14);
                EXPECT_NEAR(r.term_bernstein_lin, t.bern_lin.convert_to<double>(), 1e-14);
            }
        }
    }
}

TEST(Bound, Monotonicity) {
    for (int i = 0; i < 20; ++i) {
        const std::size_t m = 10 + 25 * static_cast<std::size_t>(i);
        for (int j = 0; j < 20; ++j) {
            const double eta = 0.05 + 0.05 * j;
            const auto here = bound::generalization_bound(m, eta, 0.05);
            const auto more_m = bound::generalization_bound(m + 25, eta, 0.05);
            EXPECT_LT(more_m.term_mcdiarmid, here.term_mcdiarmid);
            EXPECT_LT(more_m.term_bernstein_sqrt, here.term_bernstein_sqrt);
            EXPECT_LT(more_m.term_bernstein_lin, here.term_bernstein_lin);
            if (j + 1 < 20) {
                const auto more_eta = bound::generalization_bound(m, eta + 0.05, 0.05);
                EXPECT_GT(more_eta.term_bernstein_sqrt, here.term_bernstein_sqrt);
                EXPECT_EQ(more_eta.term_mcdiarmid, here.term_mcdiarmid);
            }
        }
    }
}

TEST(Bound, ArgumentChecks) {
    EXPECT_THROW(bound::generalization_bound(0, 1.0, 0.05), Error);
    EXPECT_THROW(bound::generalization_bound(10, 0.0, 0.05), Error);
    EXPECT_THROW(bound::generalization_bound(10, 1.5, 0.05), Error);
    EXPECT_THROW(bound::generalization_bound(10, 1.0, 0.0), Error);
    EXPECT_THROW(bound::generalization_bound(10, 1.0, 1.0), Error);
    EXPECT_THROW(bound::generalization_bound(10, 1.0, 0.05, -1.0), Error);
}

TEST(Bound, SpearmanWithTies) {
    const std::vector<double> x{1, 2, 3, 4}, up{10, 20, 30, 40}, down{4, 3, 2, 1}, tied{1, 1, 2, 3};
    EXPECT_DOUBLE_EQ(bound::spearman(x, up), 1.0);
    EXPECT_DOUBLE_EQ(bound::spearman(x, down), -1.0);
    // Ranks of `tied` are 1.5, 1.5, 3, 4: rho = 4.5 / sqrt(5 * 4.5).
    EXPECT_NEAR(bound::spearman(x, tied), 4.5 / std::sqrt(22.5), 1e-15);
    EXPECT_THROW(bound::spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST(Bound, SkewedSizes) {
    for (double f : {0.0, 0.125, 0.25, 0.375, 0.5}) {
        const auto s = bound::skewed_sizes(100, 1000, f);
        EXPECT_EQ(s.size(), 100u);
        EXPECT_EQ(std::accumulate(s.begin(), s.end(), std::size_t{0}), 1000u);
        EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), 1u)), static_cast<std::size_t>(std::llround(100 * f)));
    }
    // More singletons means larger eta at fixed m and n.
    double prev = 0;
    for (double f : {0.0, 0.125, 0.25, 0.375, 0.5}) {
        const double eta = bound::redundancy_heterogeneity(bound::skewed_sizes(100, 1000, f));
        EXPECT_GT(eta, prev);
        prev = eta;
    }
    EXPECT_THROW(bound::skewed_sizes(10, 5, 0.0), Error);
    EXPECT_THROW(bound::skewed_sizes(10, 50, 1.0), Error);
}

TEST(Bound, TargetFunction) {
    const std::vector<double> zero{0.0, 0.0}, quarter{0.25, 0.25};
    EXPECT_DOUBLE_EQ(bound::target_value(zero, bound::Target::sinusoid), 5.0);
    EXPECT_NEAR(bound::target_value(quarter, bound::Target::sinusoid), 10.0, 1e-12);
    EXPECT_EQ(bound::target_value(quarter, bound::Target::constant), 5.0);
}

TEST(Bound, EmpiricalGapIsSeeded) {
    bound::ExperimentConfig cfg;
    cfg.test_size = 500;
    const std::vector<std::size_t> sizes(30, 2);
    const auto a = bound::empirical_gap(sizes, cfg, 9);
    const auto b = bound::empirical_gap(sizes, cfg, 9);
    const auto c = bound::empirical_gap(sizes, cfg, 10);
    EXPECT_EQ(a.gap, b.gap);
    EXPECT_NE(a.gap, c.gap);
    EXPECT_EQ(a.gap, std::abs(a.test_mse - a.train_mse));
    // Noise floor: test MSE cannot beat the label noise variance by much.
    EXPECT_GT(a.test_mse, 0.5 * cfg.label_noise * cfg.label_noise);
}

TEST(Bound, ExperimentConfigValidation) {
    bound::ExperimentConfig cfg;
    EXPECT_NO_THROW(bound::validate(cfg));
    cfg.seeds = 9;
    EXPECT_THROW(bound::validate(cfg), Error);
    cfg = {};
    cfg.m_grid = {10, 20, 30};
    EXPECT_THROW(bound::validate(cfg), Error);
    cfg = {};
    cfg.axis = bound::SweepAxis::eta;
    cfg.singleton_fractions = {0.0, 0.1, 1.0, 0.2};
    EXPECT_THROW(bound::validate(cfg), Error);

    const auto parsed = experiment_config_from_json(
        nlohmann::json::parse(R"({"axis":"eta","seeds":12,"test_size":100,"target":"constant"})"));
    EXPECT_EQ(parsed.axis, bound::SweepAxis::eta);
    EXPECT_EQ(parsed.seeds, 12u);
    EXPECT_EQ(parsed.target, bound::Target::constant);
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"axis":"k"})")), Error);
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"seeds":"many"})")), Error);
}

TEST(Bound, SmallExperimentIsReproducible) {
    bound::ExperimentConfig cfg;
    cfg.seeds = 10;
    cfg.test_size = 200;
    cfg.m_grid = {20, 40, 80, 160};
    const auto a = bound::run_bound_experiment(cfg, 3);
    const auto b = bound::run_bound_experiment(cfg, 3);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    ASSERT_EQ(a.points.size(), 4u);
    for (const auto& p : a.points) {
        EXPECT_EQ(p.n, p.m);
        EXPECT_EQ(p.eta, 1.0);
        EXPECT_GE(p.std_gap, 0.0);
    }
}

TEST(Bound, ClusterStructureOfFixture) {
    const auto dir = std::filesystem::path(SYNDR_TEST_DATA) / "tiny";
    const auto manifest = read_manifest(dir / "train.jsonl");
    const auto feats = load_features(dir / "records.fset");
    std::vector<std::size_t> rows;
    std::vector<double> labels;
    for (const auto& r : manifest) {
        rows.push_back(*feats.find(r.id));
        labels.push_back(r.label);
    }
    const auto s = bound::estimate_cluster_structure(feats.subset(rows), labels, 0.1, 1.0);
    EXPECT_EQ(s.m, 160u);
    EXPECT_EQ(s.n, 180u);
    std::vector<std::size_t> want(159, 1);
    want.push_back(21);
    EXPECT_NEAR(s.eta, oracle::eta(want).convert_to<double>(), 1e-15);
}

TEST(Bound, LimitAndScalingExamples) {
    // Data terms vanish like 1/sqrt(m): about 1.07e-4 at m = 1e9, below 1e-4
    // from m = 1.2e9 on.
    const auto t = oracle::bound_terms(1000000000, Dec50(1), Dec50("0.05"));
    EXPECT_NEAR(bound::generalization_bound(1000000000, 1.0, 0.05).total,
                (t.mcdiarmid + t.bern_sqrt + t.bern_lin).convert_to<double>(), 1e-18);
    EXPECT_LT(bound::generalization_bound(1200000000, 1.0, 0.05).total, 1e-4);
    const auto lo = bound::generalization_bound(100, 0.25, 0.05);
    const auto hi = bound::generalization_bound(100, 0.5, 0.05);
    EXPECT_NEAR(hi.term_bernstein_sqrt / lo.term_bernstein_sqrt, std::sqrt(2.0), 1e-15);
    for (double eta : {0.1, 0.5, 1.0}) {
        const auto r = bound::generalization_bound(50, eta, 0.1, 0.02);
        for (double t : {r.term_rad, r.term_mcdiarmid, r.term_bernstein_sqrt, r.term_bernstein_lin})
            EXPECT_GE(r.total, t);
    }
    // eta = 1: classical sqrt(2L/m) plus sqrt(L/(8m)) plus 2L/(3m).
    const double L = std::log(2.0 / 0.05);
    const auto iid = bound::generalization_bound(100, 1.0, 0.05);
    EXPECT_NEAR(iid.total, std::sqrt(2 * L / 100) + std::sqrt(L / 800) + 2 * L / 300, 1e-15);
}

TEST(Bound, ClusterStructureExamples) {
    // All distinct.
    BoxMuller g(4);
    const auto distinct = oracle::random_set(g, 30, 8);
    std::vector<double> labels(30);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = 0.3 * static_cast<double>(i);
    auto s = bound::estimate_cluster_structure(distinct, labels, 0.01, 0.1);
    EXPECT_EQ(s.m, 30u);
    EXPECT_EQ(s.eta, 1.0);

    // 60 identical samples, then thinned to 30.
    std::vector<FeatureVector> rows;
    for (int i = 0; i < 60; ++i) rows.push_back({"x" + std::to_string(i), {1.f, 2.f, 3.f}});
    const FeatureSet same(3, rows);
    const std::vector<double> flat(60, 5.0);
    s = bound::estimate_cluster_structure(same, flat, 0.1, 1.0);
    EXPECT_EQ(s.m, 1u);
    EXPECT_EQ(s.sizes, std::vector<std::size_t>{60});
    EXPECT_DOUBLE_EQ(s.eta, 1.0 / 60);
    const auto part = drcdown::cluster_pairs(drcdown::find_similar_pairs(same, flat, 0.1, 1.0), 60);
    const auto kept = drcdown::downsample_clusters(part, 20, 1);
    EXPECT_EQ(kept.size(), 30u);
    const std::vector<std::size_t> after{kept.size()};
    EXPECT_DOUBLE_EQ(bound::redundancy_heterogeneity(after), 1.0 / 30);
}

TEST(Bound, MoreDistinctSamplesShrinkTheGap) {
    bound::ExperimentConfig cfg;
    cfg.test_size = 1000;
    const std::vector<std::size_t> singletons(1000, 1), tens(100, 10);
    double gap_many = 0, gap_few = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        gap_many += bound::empirical_gap(singletons, cfg, s).gap;
        gap_few += bound::empirical_gap(tens, cfg, s).gap;
    }
    EXPECT_LT(gap_many, gap_few);
}

TEST(Bound, NoiselessConstantTargetHasNoGap) {
    bound::ExperimentConfig cfg;
    cfg.target = bound::Target::constant;
    cfg.label_noise = 0.0;
    cfg.test_size = 200;
    for (const auto& sizes : {std::vector<std::size_t>(40, 1), bound::skewed_sizes(20, 100, 0.25)}) {
        const auto g = bound::empirical_gap(sizes, cfg, 3);
        EXPECT_EQ(g.gap, 0.0);
        EXPECT_EQ(g.train_mse, 0.0);
    }
}
