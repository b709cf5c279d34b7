#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace qsm::detail {

// Worker count: QSM_THREADS overrides, otherwise hardware concurrency.
inline int thread_count() {
    static const int n = [] {
        if (const char* env = std::getenv("QSM_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }();
    return n;
}

// Static partition of [0, n). Each index runs on exactly one thread with
// the same sequential arithmetic it would use single-threaded, so results
// are bitwise independent of the worker count. Callers must write to
// disjoint outputs per index.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (int i = 0; i < std::min(chunk, n); ++i) fn(i);
    for (auto& t : pool) t.join();
}

} // namespace qsm::detail
