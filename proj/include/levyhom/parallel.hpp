#pragma once

#include <functional>

namespace levyhom {

// Global worker budget shared by assembly and experiment batches.
int thread_budget();
void set_thread_budget(int n);

// Partitions [0, n) into contiguous blocks and runs fn(begin, end) on each,
// using up to the budgeted number of threads.  Exceptions propagate.
void parallel_blocks(int n, const std::function<void(int, int)>& fn);

}  // namespace levyhom
