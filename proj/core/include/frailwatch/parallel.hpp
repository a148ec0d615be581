#pragma once

#include <cstddef>
#include <functional>

namespace frailwatch {

// Worker count: FRAILWATCH_THREADS env var when set, else hardware
// concurrency. Never less than 1.
unsigned worker_threads();

// Runs fn(i) for every i in [0, n). Work items must be independent and write
// to disjoint slots; completion order is unspecified, so callers that need a
// deterministic result assemble it from the slots afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace frailwatch
