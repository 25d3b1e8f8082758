#pragma once

#include <cstddef>
#include <functional>

namespace elastipinn::util {

// Worker count: ELASTIPINN_THREADS when set (>= 1), else the hardware count.
int worker_count();
// Overrides the environment for this process (0 restores the default).
void set_worker_count(int n);

// Calls fn(begin, end) on contiguous chunks of [0, n). Each index is visited
// exactly once; callers write per-index results and reduce afterwards in
// index order, which keeps results independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace elastipinn::util
