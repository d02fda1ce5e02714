#pragma once

// Index-parallel loop whose results land in caller-owned slots, so the merge
// order is the index order regardless of scheduling.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hyperfe2 {

inline unsigned default_worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Calls body(i) for i in [0, n). body must only write state owned by index i.
// The first exception thrown by any worker is rethrown after all workers join.
template <class Body>
void parallel_for(int n, Body&& body, unsigned workers = default_worker_count()) {
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(n, 0)));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace hyperfe2
