#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sepvote {

/// Runs fn(i) for i in [0, n). Work items must write only to slots they own,
/// so the result is identical for any worker count. The first exception thrown
/// by a work item is rethrown on the calling thread.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers == 0) workers = 1;
    if (workers == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Default worker count for CLI runs.
inline unsigned default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

} // namespace sepvote
