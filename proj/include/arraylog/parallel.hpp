#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace arraylog {

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

// Splits [0, n) into one contiguous block per worker and runs
// fn(block_index, begin, end) on each. Callers write only to disjoint
// regions and must not let results depend on where the block boundaries
// fall; that keeps every bulk kernel deterministic across worker counts.
// fn must not throw.
template <typename Fn>
void parallel_blocks(std::size_t n, unsigned workers, Fn&& fn) {
    if (n == 0) return;
    std::size_t nblocks = std::min<std::size_t>(resolve_workers(workers), n);
    if (nblocks <= 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::size_t chunk = (n + nblocks - 1) / nblocks;
    std::vector<std::thread> pool;
    pool.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        std::size_t lo = b * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, b, lo, hi] { fn(b, lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace arraylog
