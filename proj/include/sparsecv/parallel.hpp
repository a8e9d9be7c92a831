#pragma once

#include <cstddef>
#include <functional>

namespace sparsecv {

/// Worker count used by parallel_for. 0 means hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, count) on a bounded pool of std::threads.
/// Each index is visited exactly once; callers write results by index, so
/// output never depends on scheduling. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sparsecv
