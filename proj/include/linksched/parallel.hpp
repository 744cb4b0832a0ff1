#pragma once

#include <cstddef>
#include <functional>

namespace linksched {

// Worker count: hardware concurrency, capped by LINKSCHED_THREADS when set.
std::size_t worker_count();

// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers write
// results into per-index slots so the output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace linksched
