#pragma once

#include <cstddef>
#include <functional>

namespace shellflow {

/// Worker count: SHELLFLOW_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once, so writing results into slot i keeps output independent
/// of scheduling. The exception thrown for the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace shellflow
