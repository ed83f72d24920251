#pragma once

#include <cstddef>
#include <functional>

namespace hsvm {

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
// Each index is executed exactly once; callers write to disjoint slots.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

int resolve_threads(int threads);

}  // namespace hsvm
