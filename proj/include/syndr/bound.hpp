#pragma once

#include "syndr/features.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace syndr::bound {

/// m clusters with sizes k_i; η = (1/m)·Σ 1/k_i.
struct ClusterStats {
    std::size_t m = 0;
    std::vector<std::size_t> sizes;
    std::size_t n = 0;
    double eta = 0.0;
};

/// Terms of the clustered-data generalization bound
///   2·Rad + √(2·ln(2/δ)/m) + √(η·ln(2/δ)/(8m)) + 2·ln(2/δ)/(3m).
struct BoundReport {
    std::size_t m = 0;
    double eta = 0.0;
    double delta = 0.0;
    double rad = 0.0;
    double term_rad = 0.0;
    double term_mcdiarmid = 0.0;
    double term_bernstein_sqrt = 0.0;
    double term_bernstein_lin = 0.0;
    double total = 0.0;
    bool data_terms_only = false; // rad == 0
};

double redundancy_heterogeneity(std::span<const std::size_t> sizes);

ClusterStats cluster_stats(std::span<const std::size_t> sizes);

BoundReport generalization_bound(std::size_t m, double eta, double delta, double rad = 0.0);

/// Pair detection + union-find over (features, labels), summarised as
/// ClusterStats.
ClusterStats estimate_cluster_structure(const FeatureSet& features, std::span<const double> labels, double t_df,
                                        double t_g);

// ---------------------------------------------------------------------------
// Empirical trend harness
//
// m centres uniform on [0,1]^d; centre i gets k_i − 1 extra points uniform in
// a radius-r ball around it (clipped to the cube). Labels are g(x) + noise.
// A k-NN regressor is fit on all n points; the gap is |test MSE − train MSE|
// with the test MSE taken on a fresh i.i.d. sample. Train MSE weights every
// sample equally (not every cluster).

enum class SweepAxis { m, eta };
enum class Target { sinusoid, constant };

std::string_view to_string(SweepAxis axis) noexcept;

struct ExperimentConfig {
    SweepAxis axis = SweepAxis::m;
    std::size_t dim = 2;
    Target target = Target::sinusoid;
    double radius = 0.01;
    double label_noise = 0.1;
    std::size_t knn_k = 3;
    std::size_t test_size = 5000;
    std::size_t seeds = 20;
    double delta = 0.05;

    // axis == m: every centre has `cluster_size` samples.
    std::vector<std::size_t> m_grid = {25, 50, 100, 200, 400};
    std::size_t cluster_size = 1;

    // axis == eta: fixed m and n; a fraction of centres are singletons and
    // the remaining points are spread evenly over the other centres.
    std::size_t skew_m = 100;
    std::size_t skew_n = 1000;
    std::vector<double> singleton_fractions = {0.0, 0.125, 0.25, 0.375, 0.5};
};

/// Throws Error(invalid_config) on degenerate settings.
void validate(const ExperimentConfig& config);

/// g(x) = (1 + sin(2π·Σx_j/d))·5 for the sinusoid, 5 for the constant.
double target_value(std::span<const double> x, Target target);

/// Cluster sizes for one point of the eta sweep.
std::vector<std::size_t> skewed_sizes(std::size_t m, std::size_t n, double singleton_fraction);

struct GapSample {
    double train_mse = 0.0;
    double test_mse = 0.0;
    double gap = 0.0;
};

/// One draw of the experiment for the given cluster sizes.
GapSample empirical_gap(std::span<const std::size_t> sizes, const ExperimentConfig& config, std::uint64_t seed);

struct TrendPoint {
    double axis_value = 0.0;
    std::size_t m = 0;
    std::size_t n = 0;
    double eta = 0.0;
    double mean_gap = 0.0;
    double std_gap = 0.0;
    double stderr_gap = 0.0; // Monte-Carlo error of mean_gap
    double mean_train_mse = 0.0;
    double mean_test_mse = 0.0;
    BoundReport bound;       // data terms at (m, η)
};

struct TrendReport {
    SweepAxis axis = SweepAxis::m;
    std::vector<TrendPoint> points;
    std::size_t seeds = 0;
    std::size_t test_size = 0;
    double rank_correlation = 0.0; // Spearman(axis value, mean gap)
};

TrendReport run_bound_experiment(const ExperimentConfig& config, std::uint64_t seed);

/// Spearman correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

} // namespace syndr::bound
