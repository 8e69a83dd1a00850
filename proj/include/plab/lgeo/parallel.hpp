#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace plab {

// Worker count for parallel maps: PERELMAN_LAB_THREADS if set, else the hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n) on worker_count() threads. Each index is written by exactly one
// call, so callers that store into slot i get results independent of scheduling. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace plab
