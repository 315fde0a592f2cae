#include "syndr/bound.hpp"

#include "syndr/drcdown.hpp"
#include "syndr/error.hpp"

#include <cmath>

namespace syndr::bound {

double redundancy_heterogeneity(std::span<const std::size_t> sizes) {
    if (sizes.empty()) throw Error(ErrorCode::invalid_argument, "redundancy_heterogeneity: no clusters");
    // Neumaier-compensated Σ 1/k_i.
    double sum = 0.0, comp = 0.0;
    for (std::size_t k : sizes) {
        if (k == 0) throw Error(ErrorCode::invalid_argument, "redundancy_heterogeneity: cluster size 0");
        const double v = 1.0 / static_cast<double>(k);
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return (sum + comp) / static_cast<double>(sizes.size());
}

ClusterStats cluster_stats(std::span<const std::size_t> sizes) {
    ClusterStats s;
    s.m = sizes.size();
    s.sizes.assign(sizes.begin(), sizes.end());
    for (auto k : sizes) s.n += k;
    s.eta = redundancy_heterogeneity(sizes);
    return s;
}

BoundReport generalization_bound(std::size_t m, double eta, double delta, double rad) {
    if (m < 1) throw Error(ErrorCode::out_of_range, "generalization_bound: m must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::out_of_range, "generalization_bound: eta must lie in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) {
        throw Error(ErrorCode::out_of_range, "generalization_bound: delta must lie in (0,1)");
    }
    if (!(rad >= 0.0) || !std::isfinite(rad)) {
        throw Error(ErrorCode::out_of_range, "generalization_bound: Rademacher complexity must be >= 0");
    }
    const double md = static_cast<double>(m);
    const double log_term = std::log(2.0 / delta);

    BoundReport r;
    r.m = m;
    r.eta = eta;
    r.delta = delta;
    r.rad = rad;
    r.term_rad = 2.0 * rad;
    r.term_mcdiarmid = std::sqrt(2.0 * log_term / md);
    r.term_bernstein_sqrt = std::sqrt(eta * log_term / (8.0 * md));
    r.term_bernstein_lin = 2.0 * log_term / (3.0 * md);
    r.total = r.term_rad + r.term_mcdiarmid + r.term_bernstein_sqrt + r.term_bernstein_lin;
    r.data_terms_only = rad == 0.0;
    return r;
}

ClusterStats estimate_cluster_structure(const FeatureSet& features, std::span<const double> labels, double t_df,
                                        double t_g) {
    const auto pairs = drcdown::find_similar_pairs(features, labels, t_df, t_g);
    const auto partition = drcdown::cluster_pairs(pairs, features.size());
    return cluster_stats(partition.sizes());
}

} // namespace syndr::bound
