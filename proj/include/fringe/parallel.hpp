#pragma once

#include <cstddef>
#include <functional>

namespace fringe {

// Worker count: FRINGE_THREADS if set (>= 1), otherwise hardware concurrency.
unsigned thread_count();

// Runs fn(i) for i in [0, n) on up to thread_count() threads. Each index is
// handled exactly once; callers write results by index so output order does
// not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace fringe
