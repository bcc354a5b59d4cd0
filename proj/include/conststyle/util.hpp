#pragma once

#include <cstddef>
#include <functional>

namespace conststyle {

// Worker cap from CSTYLE_THREADS (default 1 = fully serial/deterministic).
// Read once per process.
int worker_thread_count();

// Runs fn(i) for i in [0, n), partitioned into contiguous chunks across the
// configured workers. fn must be safe to run concurrently for distinct i;
// callers keep reductions deterministic by accumulating per-index results
// serially afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace conststyle
