#include "syndr/bound.hpp"

#include "syndr/error.hpp"
#include "syndr/parallel.hpp"
#include "syndr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace syndr::bound {

namespace {

struct Sample {
    std::vector<double> x; // row-major n × d
    std::vector<double> y;
};

class SampleSource {
public:
    SampleSource(const ExperimentConfig& config, std::uint64_t seed)
        : config_(config), uniform_(seed), normal_(SplitMix64(seed ^ 0x5bd1e995ULL).next()) {}

    void uniform_point(std::vector<double>& out) {
        for (std::size_t j = 0; j < config_.dim; ++j) out.push_back(uniform_.next_unit());
    }

    // Uniform in the radius-r ball around `centre`, clipped to [0,1]^d.
    void ball_point(std::span<const double> centre, std::vector<double>& out) {
        std::vector<double> offset(config_.dim);
        for (;;) {
            double norm2 = 0.0;
            for (auto& o : offset) {
                o = (2.0 * uniform_.next_unit() - 1.0) * config_.radius;
                norm2 += o * o;
            }
            if (norm2 <= config_.radius * config_.radius) break;
        }
        for (std::size_t j = 0; j < config_.dim; ++j) out.push_back(std::clamp(centre[j] + offset[j], 0.0, 1.0));
    }

    double label(std::span<const double> x) {
        return target_value(x, config_.target) + config_.label_noise * normal_.next();
    }

private:
    const ExperimentConfig& config_;
    SplitMix64 uniform_;
    BoxMuller normal_;
};

class KnnRegressor {
public:
    KnnRegressor(const Sample& train, std::size_t dim, std::size_t k) : train_(train), dim_(dim), k_(k) {}

    double predict(std::span<const double> q) const {
        const std::size_t n = train_.y.size();
        const std::size_t k = std::min(k_, n);
        scratch_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                const double diff = train_.x[i * dim_ + j] - q[j];
                d2 += diff * diff;
            }
            scratch_[i] = {d2, i};
        }
        std::partial_sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k), scratch_.end());
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += train_.y[scratch_[i].second];
        return acc / static_cast<double>(k);
    }

private:
    const Sample& train_;
    std::size_t dim_;
    std::size_t k_;
    mutable std::vector<std::pair<double, std::size_t>> scratch_;
};

struct PointSpec {
    double axis_value;
    std::vector<std::size_t> sizes;
};

std::vector<PointSpec> sweep_points(const ExperimentConfig& config) {
    std::vector<PointSpec> points;
    if (config.axis == SweepAxis::m) {
        for (auto m : config.m_grid) {
            points.push_back({static_cast<double>(m), std::vector<std::size_t>(m, config.cluster_size)});
        }
    } else {
        for (double f : config.singleton_fractions) {
            auto sizes = skewed_sizes(config.skew_m, config.skew_n, f);
            const double eta = redundancy_heterogeneity(sizes);
            points.push_back({eta, std::move(sizes)});
        }
    }
    return points;
}

// Common random numbers: draw s of every grid point uses the same stream.
std::uint64_t draw_seed(std::uint64_t base, std::size_t draw) {
    SplitMix64 mix(base + 0x632be59bd9b4e019ULL * (draw + 1));
    return mix.next();
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
        i = j + 1;
    }
    return ranks;
}

} // namespace

std::string_view to_string(SweepAxis axis) noexcept { return axis == SweepAxis::m ? "m" : "eta"; }

void validate(const ExperimentConfig& c) {
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_config, "bound experiment: " + what); };
    if (c.dim < 1) fail("dim must be >= 1");
    if (!(c.radius >= 0.0)) fail("radius must be >= 0");
    if (!(c.label_noise >= 0.0)) fail("label noise must be >= 0");
    if (c.knn_k < 1) fail("k-NN k must be >= 1");
    if (c.test_size < 1) fail("test size must be >= 1");
    if (c.seeds < 10) fail("need at least 10 seeds per point");
    if (!(c.delta > 0.0 && c.delta < 1.0)) fail("delta must lie in (0,1)");
    if (c.axis == SweepAxis::m) {
        if (c.m_grid.size() < 4) fail("m grid needs at least 4 points");
        if (c.cluster_size < 1) fail("cluster size must be >= 1");
        for (auto m : c.m_grid) {
            if (m < 2) fail("every m must be >= 2");
        }
    } else {
        if (c.singleton_fractions.size() < 4) fail("eta sweep needs at least 4 points");
        if (c.skew_m < 2) fail("skew m must be >= 2");
        if (c.skew_n < c.skew_m) fail("skew n must be >= m");
        for (double f : c.singleton_fractions) {
            if (!(f >= 0.0 && f < 1.0)) fail("singleton fractions must lie in [0,1)");
        }
    }
}

double target_value(std::span<const double> x, Target target) {
    if (target == Target::constant) return 5.0;
    double s = 0.0;
    for (double v : x) s += v;
    return (1.0 + std::sin(2.0 * std::numbers::pi * s / static_cast<double>(x.size()))) * 5.0;
}

std::vector<std::size_t> skewed_sizes(std::size_t m, std::size_t n, double singleton_fraction) {
    const auto singles = static_cast<std::size_t>(std::llround(singleton_fraction * static_cast<double>(m)));
    if (singles >= m || n < m) {
        throw Error(ErrorCode::invalid_config, "skewed_sizes: need singletons < m and n >= m");
    }
    const std::size_t rest = m - singles;
    const std::size_t pool = n - singles;
    std::vector<std::size_t> sizes(singles, 1);
    for (std::size_t i = 0; i < rest; ++i) sizes.push_back(pool / rest + (i < pool % rest ? 1 : 0));
    return sizes;
}

GapSample empirical_gap(std::span<const std::size_t> sizes, const ExperimentConfig& config, std::uint64_t seed) {
    const std::size_t d = config.dim;
    SampleSource src(config, seed);
    Sample train;
    std::vector<double> centre;
    for (std::size_t k : sizes) {
        centre.clear();
        src.uniform_point(centre);
        const std::size_t base = train.x.size();
        train.x.insert(train.x.end(), centre.begin(), centre.end());
        train.y.push_back(src.label(std::span<const double>(train.x).subspan(base, d)));
        for (std::size_t extra = 1; extra < k; ++extra) {
            const std::size_t at = train.x.size();
            src.ball_point(centre, train.x);
            train.y.push_back(src.label(std::span<const double>(train.x).subspan(at, d)));
        }
    }

    const KnnRegressor model(train, d, config.knn_k);
    GapSample g;
    const std::size_t n = train.y.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double e = model.predict(std::span<const double>(train.x).subspan(i * d, d)) - train.y[i];
        g.train_mse += e * e;
    }
    g.train_mse /= static_cast<double>(n);

    std::vector<double> q;
    q.reserve(d);
    for (std::size_t t = 0; t < config.test_size; ++t) {
        q.clear();
        src.uniform_point(q);
        const double e = model.predict(q) - src.label(q);
        g.test_mse += e * e;
    }
    g.test_mse /= static_cast<double>(config.test_size);
    g.gap = std::abs(g.test_mse - g.train_mse);
    return g;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "spearman: need two equal-length series of length >= 2");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

TrendReport run_bound_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    validate(config);
    const auto points = sweep_points(config);
    const std::size_t draws = config.seeds;

    std::vector<GapSample> samples(points.size() * draws);
    parallel_blocks(samples.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t t = begin; t < end; ++t) {
            const std::size_t p = t / draws, s = t % draws;
            samples[t] = empirical_gap(points[p].sizes, config, draw_seed(seed, s));
        }
    });

    TrendReport report;
    report.axis = config.axis;
    report.seeds = draws;
    report.test_size = config.test_size;
    std::vector<double> axis, gaps;
    for (std::size_t p = 0; p < points.size(); ++p) {
        TrendPoint tp;
        tp.axis_value = points[p].axis_value;
        const auto stats = cluster_stats(points[p].sizes);
        tp.m = stats.m;
        tp.n = stats.n;
        tp.eta = stats.eta;
        for (std::size_t s = 0; s < draws; ++s) {
            const auto& g = samples[p * draws + s];
            tp.mean_gap += g.gap;
            tp.mean_train_mse += g.train_mse;
            tp.mean_test_mse += g.test_mse;
        }
        const double nd = static_cast<double>(draws);
        tp.mean_gap /= nd;
        tp.mean_train_mse /= nd;
        tp.mean_test_mse /= nd;
        double var = 0.0;
        for (std::size_t s = 0; s < draws; ++s) {
            const double e = samples[p * draws + s].gap - tp.mean_gap;
            var += e * e;
        }
        tp.std_gap = std::sqrt(var / (nd - 1.0));
        tp.stderr_gap = tp.std_gap / std::sqrt(nd);
        tp.bound = generalization_bound(tp.m, tp.eta, config.delta, 0.0);
        axis.push_back(tp.axis_value);
        gaps.push_back(tp.mean_gap);
        report.points.push_back(std::move(tp));
    }
    report.rank_correlation = spearman(axis, gaps);
    return report;
}

} // namespace syndr::bound
