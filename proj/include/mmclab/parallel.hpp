#pragma once

// Minimal index-space parallelism. Work items must not share mutable
// state; results keyed by item index stay deterministic regardless of
// the worker count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mmclab {

inline int default_thread_count() {
    if (const char* env = std::getenv("MMC_LAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename F>
void parallel_for(long n, int threads, F&& body) {
    if (threads <= 1 || n < 2) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    threads = static_cast<int>(std::min<long>(threads, n));
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    constexpr long kChunk = 64;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                long start = next.fetch_add(kChunk);
                if (start >= n) return;
                long end = std::min(n, start + kChunk);
                for (long i = start; i < end; ++i) body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace mmclab
