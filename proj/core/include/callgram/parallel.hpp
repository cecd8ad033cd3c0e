// parallel.hpp
//
// Minimal worker pool over an index range.  Work items write into
// pre-sized, index-addressed slots so results never depend on scheduling.

#ifndef CALLGRAM_PARALLEL_HPP
#define CALLGRAM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace callgram {

/// 0 means one worker per hardware thread
unsigned effective_jobs(unsigned requested) noexcept;

/// Calls fn(i) for every i in [0, count) on up to `jobs` threads.  The first
/// exception thrown by any item (lowest index) is rethrown after all workers
/// stop.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)> &fn);

}  // namespace callgram

#endif  // CALLGRAM_PARALLEL_HPP
