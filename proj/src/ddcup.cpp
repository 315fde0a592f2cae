#include "syndr/ddcup.hpp"

#include "syndr/error.hpp"
#include "syndr/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace syndr::ddcup {

std::string_view to_string(RejectReason reason) noexcept {
    switch (reason) {
    case RejectReason::too_close_to_train: return "too_close_to_train";
    case RejectReason::outside_train_support: return "outside_train_support";
    case RejectReason::too_close_to_selected: return "too_close_to_selected";
    }
    return "unknown";
}

TrainDistStats training_pairwise_stats(const FeatureSet& refs) {
    const std::size_t n = refs.size();
    if (n < 2) {
        throw Error(ErrorCode::invalid_argument,
                    "training_pairwise_stats needs at least 2 references, got " + std::to_string(n));
    }
    // Unordered pairs suffice: duplicating every value leaves median and max
    // unchanged.
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) dists.push_back(row_distance(refs, i, refs, j));
    }
    TrainDistStats stats;
    stats.count = n * (n - 1);
    stats.max = *std::max_element(dists.begin(), dists.end());

    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    const double upper = dists[mid];
    if (dists.size() % 2 == 1) {
        stats.median = upper;
    } else {
        const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
        stats.median = (lower + upper) / 2.0;
    }
    return stats;
}

SelectionResult select_diverse_candidates(const FeatureSet& refs, const FeatureSet& candidates,
                                          const SelectionOptions& options) {
    if (!candidates.empty() && refs.dim() != candidates.dim()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "select: reference dim " + std::to_string(refs.dim()) + " vs candidate dim " +
                        std::to_string(candidates.dim()));
    }
    SelectionResult result;
    result.stats = training_pairwise_stats(refs);
    const double median = result.stats.median;
    const double max = result.stats.max;

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return candidates.id(a) < candidates.id(b); });
    if (options.cap_to_reference_count && order.size() > refs.size()) {
        for (std::size_t i = refs.size(); i < order.size(); ++i) {
            result.dropped_by_cap.push_back(candidates.id(order[i]));
        }
        order.resize(refs.size());
    }

    // Distances to the training refs do not depend on earlier acceptances.
    std::vector<double> min_to_train(order.size()), max_to_train(order.size());
    parallel_blocks(order.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t k = begin; k < end; ++k) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < refs.size(); ++r) {
                const double d = row_distance(candidates, order[k], refs, r);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            min_to_train[k] = lo;
            max_to_train[k] = hi;
        }
    });

    std::vector<std::size_t> accepted;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t c = order[k];
        const std::string& id = candidates.id(c);
        if (!(min_to_train[k] > median)) {
            result.rejected.push_back({id, RejectReason::too_close_to_train});
            continue;
        }
        if (!(max_to_train[k] < max)) {
            result.rejected.push_back({id, RejectReason::outside_train_support});
            continue;
        }
        const bool diverse = std::all_of(accepted.begin(), accepted.end(), [&](std::size_t s) {
            return row_distance(candidates, c, candidates, s) > median;
        });
        if (!diverse) {
            result.rejected.push_back({id, RejectReason::too_close_to_selected});
            continue;
        }
        accepted.push_back(c);
        result.selected_ids.push_back(id);
    }
    return result;
}

} // namespace syndr::ddcup
