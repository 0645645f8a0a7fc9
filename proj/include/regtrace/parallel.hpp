#pragma once

#include <cstddef>
#include <functional>

namespace regtrace {

// Worker count: min(hardware, REGTRACE_THREADS when set), at least 1.
int thread_budget();

// Runs fn(i) for i in [0, n) on the worker pool.  Callers must write to
// disjoint output slots; reductions are then done sequentially in index
// order so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace regtrace
