#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace syndr {

inline std::size_t worker_count(std::size_t work_items) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(hw, work_items));
}

/// Runs body(begin, end, block_index) over contiguous blocks of [0, n).
/// Blocks are fixed by n and the worker count only, so callers that merge
/// per-block results in block order get schedule-independent output.
template <typename Body>
void parallel_blocks(std::size_t n, Body&& body) {
    if (n == 0) return;
    const std::size_t workers = worker_count(n);
    const std::size_t chunk = (n + workers - 1) / workers;
    if (workers == 1) {
        body(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, begin, end, w] {
            try {
                body(begin, end, w);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::size_t block_count(std::size_t n) {
    if (n == 0) return 0;
    const std::size_t workers = worker_count(n);
    const std::size_t chunk = (n + workers - 1) / workers;
    return (n + chunk - 1) / chunk;
}

} // namespace syndr
