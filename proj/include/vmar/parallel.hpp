#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vmar {

/// Calls body(i) for i in [0, n) on up to `jobs` threads. Work items are
/// claimed dynamically; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(int n, int jobs, Body&& body) {
    if (n <= 0) return;
    jobs = std::clamp(jobs, 1, n);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(jobs - 1));
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

/// Hardware concurrency, at least 1.
inline int default_jobs() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace vmar
