#pragma once

#include <cstddef>
#include <functional>

namespace qbohm {

/// Worker count: `requested` if positive, else QBOHM_THREADS if set, else the
/// hardware concurrency.
int resolve_threads(int requested = 0);

/// Runs fn(0..n-1) on up to `threads` workers. Each index is processed exactly
/// once; callers write into per-index slots so results do not depend on
/// scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace qbohm
