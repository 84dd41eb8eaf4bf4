#pragma once

#include <cstddef>
#include <functional>

namespace xlab {

// Worker count: min(hardware, EXPANDERLAB_THREADS if set, programmatic cap).
int worker_count();
void set_max_threads(int n);  // n <= 0 restores the default

// Static index partition over [0, n); results must be written to
// pre-sized storage so the merge order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace xlab
