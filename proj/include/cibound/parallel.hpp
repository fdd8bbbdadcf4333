#pragma once

#include <cstddef>
#include <functional>

namespace cibound {

// Number of worker threads: the CIBOUND_THREADS environment variable when
// set to a positive integer, otherwise the hardware concurrency (at least 1).
unsigned worker_count();

// Runs fn(0..count-1) across worker_count() threads. Each index is handled
// exactly once and results must be written to per-index slots, so outputs
// are identical regardless of the worker count. The first exception thrown
// by any fn is rethrown in the caller after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace cibound
