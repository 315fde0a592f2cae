#pragma once

#include "syndr/features.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace syndr::ddcup {

/// Median and maximum of the off-diagonal training-reference distances.
struct TrainDistStats {
    double median = 0.0;
    double max = 0.0;
    std::size_t count = 0; // ordered pairs, n·(n−1)
};

enum class RejectReason {
    too_close_to_train,
    outside_train_support,
    too_close_to_selected,
};

std::string_view to_string(RejectReason reason) noexcept;

struct Rejection {
    std::string id;
    RejectReason reason;
    bool operator==(const Rejection&) const = default;
};

struct SelectionResult {
    TrainDistStats stats;
    std::vector<std::string> selected_ids; // acceptance order
    std::vector<Rejection> rejected;
    std::vector<std::string> dropped_by_cap; // never examined
};

struct SelectionOptions {
    /// Truncate the (id-sorted) candidate pool to |refs| before selection.
    bool cap_to_reference_count = true;
};

TrainDistStats training_pairwise_stats(const FeatureSet& refs);

/// Greedy single pass over candidates in ascending-id order. A candidate is
/// accepted when its nearest training ref is farther than the median
/// training distance, its farthest training ref is nearer than the maximum
/// training distance, and it is farther than the median from every
/// candidate accepted so far. All three comparisons are strict.
SelectionResult select_diverse_candidates(const FeatureSet& refs, const FeatureSet& candidates,
                                          const SelectionOptions& options = {});

} // namespace syndr::ddcup
