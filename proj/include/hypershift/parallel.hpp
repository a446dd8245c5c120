#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

/// Tiny index-parallel helper. Worker count is hardware concurrency capped by
/// the HYPERSHIFT_THREADS environment variable; results must be written to
/// pre-sized slots indexed by the loop variable so reductions stay
/// order-independent and bit-reproducible regardless of the thread count.
namespace hypershift {

inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("HYPERSHIFT_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count) > 0
                            ? static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count))
                            : 1;
    if (workers <= 1 || count < 2) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= count) return;
                fn(k);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace hypershift
