#include "levyhom/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <vector>

namespace levyhom {

namespace {
std::atomic<int> g_budget{1};
}

int thread_budget() { return g_budget.load(); }

void set_thread_budget(int n) { g_budget.store(std::clamp(n, 1, 256)); }

void parallel_blocks(int n, const std::function<void(int, int)>& fn) {
  const int budget = std::min(thread_budget(), n);
  if (budget <= 1 || n <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::future<void>> parts;
  parts.reserve(budget);
  const int step = (n + budget - 1) / budget;
  for (int lo = 0; lo < n; lo += step) {
    const int hi = std::min(n, lo + step);
    parts.push_back(std::async(std::launch::async, [&fn, lo, hi] { fn(lo, hi); }));
  }
  for (auto& p : parts) p.get();
}

}  // namespace levyhom
