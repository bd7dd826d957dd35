// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_DETAIL_NUMERIC_HPP
#define DSOPT_DETAIL_NUMERIC_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace dsopt::detail {

/// Pairwise (cascade) summation with a fixed split rule. The result depends
/// only on the element order, never on how the values were produced, which
/// keeps batch averages bit-reproducible under any thread partitioning.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n). Tasks must be independent and write only to
/// their own output slots; the dynamic schedule then has no effect on results.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const int spawned = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n)) - 1;
    pool.reserve(static_cast<std::size_t>(spawned));
    for (int t = 0; t < spawned; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace dsopt::detail

#endif
