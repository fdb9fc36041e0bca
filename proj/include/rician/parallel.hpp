#pragma once

#include <cstddef>
#include <functional>

namespace rician {

/// Number of worker threads used by parallel_for; RICIAN_THREADS overrides
/// the hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// processed exactly once; results written to per-index slots are therefore
/// independent of scheduling. The first exception thrown by any body is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rician
