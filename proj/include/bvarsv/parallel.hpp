#pragma once

#include <functional>

namespace bvarsv {

/// Runs task(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Tasks are claimed in index order. The first exception that
/// escapes a task is rethrown after all workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& task);

int resolve_threads(int requested);

}  // namespace bvarsv
