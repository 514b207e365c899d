#pragma once

#include <cstddef>
#include <functional>

namespace qdmux {

/// Worker count resolution: explicit request > QDMUX_THREADS env > hardware.
unsigned resolve_thread_count(unsigned requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
/// Work is split into contiguous index ranges; callers index into
/// preallocated result slots, so the outcome is worker-count independent.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace qdmux
