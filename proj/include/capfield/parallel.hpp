#pragma once

#include <cstddef>
#include <functional>

namespace capfield {

/// Worker count: hardware concurrency, capped by the CAPFIELD_THREADS
/// environment variable when it holds a positive integer.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited exactly once; results must be written to disjoint slots.
/// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace capfield
