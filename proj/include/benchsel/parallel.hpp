#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace benchsel {

/// 0 means "auto": the BENCHSEL_THREADS environment variable if set, else
/// the hardware concurrency.
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BENCHSEL_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(worker_index) on `workers` threads and joins them. The first
/// exception thrown by any worker is rethrown on the calling thread.
template <class Fn>
void run_workers(std::size_t workers, Fn&& fn) {
    if (workers <= 1) {
        fn(std::size_t{0});
        return;
    }
    std::exception_ptr first;
    std::mutex mu;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    fn(w);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first) first = std::current_exception();
                }
            });
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace benchsel
