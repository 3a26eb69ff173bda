#pragma once

#include <cstddef>
#include <functional>

namespace avcl {

// Worker cap from AVCL_THREADS (positive integer), else hardware concurrency.
unsigned worker_threads();

// Runs fn(i) for i in [0, n) on up to `threads` threads. Each index runs
// exactly once; the first exception thrown by any task is rethrown after all
// workers have joined.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace avcl
