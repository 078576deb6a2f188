#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace gsrast {

/// Resolve a --threads style request: 0 means hardware concurrency.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Static contiguous-chunk parallel loop. threads == 1 runs inline, so a
/// single-threaded run is bitwise reproducible regardless of the machine.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, int threads, Fn&& fn) {
    const std::size_t n = end > begin ? end - begin : 0;
    threads = resolve_threads(threads);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Lock-free floating point accumulation into a plain double slot.
inline void atomic_add(double& slot, double value) {
    std::atomic_ref<double> ref(slot);
    double expected = ref.load(std::memory_order_relaxed);
    while (!ref.compare_exchange_weak(expected, expected + value, std::memory_order_relaxed)) {
    }
}

}  // namespace gsrast
