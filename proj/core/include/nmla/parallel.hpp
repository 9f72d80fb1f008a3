#pragma once

#include <cstddef>
#include <functional>

namespace nmla {

// NMLA_WORKERS if set and positive, otherwise the hardware thread count.
int worker_count();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers write results
// into per-index slots and reduce them in index order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers);

}  // namespace nmla
