// Parallel map over an index range with deterministic results: workers fill
// disjoint per-index slots, reductions stay sequential at the call site.
#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace dgest {

template <typename F>
void parallel_for(int n, F&& body, int min_grain = 64) {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw <= 1 || n < 2 * min_grain) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    const int nthreads = static_cast<int>(std::min<unsigned>(hw, (n + min_grain - 1) / min_grain));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int tid = 0; tid < nthreads; ++tid) {
        const int lo = static_cast<int>(static_cast<long long>(n) * tid / nthreads);
        const int hi = static_cast<int>(static_cast<long long>(n) * (tid + 1) / nthreads);
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace dgest
