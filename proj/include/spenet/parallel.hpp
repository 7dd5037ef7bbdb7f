#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spenet {

/// Worker count for replicate/iteration loops. SPENET_THREADS overrides the
/// hardware default; 1 forces serial execution.
inline unsigned worker_count() {
    if (const char* env = std::getenv("SPENET_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace detail {

inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

}  // namespace detail

/// Runs body(i) for i in [0, count) across workers.
///
/// The contract all callers rely on: body(i) is a pure function of i (each
/// index owns its output slot and RNG stream), so results are identical for
/// any worker count, including 1. Nested calls run serially instead of
/// oversubscribing.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, unsigned workers = 0) {
    if (count == 0) return;
    if (workers == 0) workers = worker_count();
    if (workers <= 1 || count == 1 || detail::in_parallel_region()) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    if (workers > count) workers = static_cast<unsigned>(count);

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto run = [&]() {
        detail::in_parallel_region() = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) break;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                break;
            }
        }
        detail::in_parallel_region() = false;
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace spenet
