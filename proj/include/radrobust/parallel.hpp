// Deterministic fork-join helper. Work items write to disjoint output slots,
// so results never depend on the schedule or the thread count.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace radrobust {

inline int& thread_cap_storage() {
    static int cap = 0;  // 0 = not set
    return cap;
}

inline void set_thread_cap(int n) { thread_cap_storage() = n; }

inline int effective_threads() {
    int cap = thread_cap_storage();
    if (cap <= 0) {
        if (const char* env = std::getenv("RADROBUST_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) cap = v;
        }
    }
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, cap);
}

// Runs fn(i) for i in [0, n). Exceptions in workers are rethrown (first one wins).
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int nthreads = std::min<std::size_t>(static_cast<std::size_t>(effective_threads()), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && first_error) std::rethrow_exception(first_error);
}

}  // namespace radrobust
