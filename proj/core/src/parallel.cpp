#include "callgram/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace callgram {

unsigned effective_jobs(unsigned requested) noexcept {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)> &fn) {
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(effective_jobs(jobs), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    // lowest failing index so far; items above it are skipped, items below still run
    std::atomic<std::size_t> failed_at{count};
    std::mutex mu;
    std::exception_ptr error;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || i > failed_at.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock{mu};
                if (i < failed_at.load()) {
                    failed_at = i;
                    error = std::current_exception();
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace callgram
