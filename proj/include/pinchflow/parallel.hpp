#pragma once

#include <cstddef>
#include <functional>

namespace pinchflow {

/// Worker count: the explicit request if positive, else PINCHFLOW_THREADS if
/// set to a positive value, else the hardware concurrency.
int worker_count(int requested = 0);

/// Runs body(begin, end, worker) over [0, n) split into contiguous chunks, one
/// per worker.  The chunking depends only on n and the worker count.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t, int)>& body);

}  // namespace pinchflow
