#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace binreg {

/// Runs fn(i) for i in [0, n) over `threads` workers in contiguous chunks.
/// Callers own determinism: fn(i) must depend only on i.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace binreg
