#pragma once

#include <cstddef>
#include <functional>

namespace styleaudit {

// Global worker budget for parallel_for. 0 = use hardware concurrency.
void set_worker_count(int n);
int worker_count();

// Runs fn(i) for i in [0, n). Work items must be independent; results keyed
// by index so the outcome is identical for any worker count. Nested calls
// from inside a parallel region run sequentially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace styleaudit
