#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace blowup {

/// Resolves a --jobs value: 0 means hardware concurrency.
inline unsigned resolve_jobs(unsigned jobs)
{
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    return jobs;
}

/// Evaluates fn(0..count-1) on up to `jobs` threads. Results come back in
/// index order, so output never depends on scheduling. The first exception
/// thrown by any task is rethrown after all workers finish.
template <class Fn>
auto parallel_map(std::size_t count, unsigned jobs, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))>
{
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };

    const unsigned n = std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(count, 1));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);

    std::vector<R> out;
    out.reserve(count);
    for (auto& slot : slots)
        out.push_back(std::move(*slot));
    return out;
}

} // namespace blowup
