#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace swarmflow {

/// Runs body(i) for i in [0, n) on up to `threads` workers with static contiguous chunks.
/// Each index is handled by exactly one worker, so results never depend on the schedule
/// as long as body(i) only writes to slot i.
template <class Body>
void parallel_for(std::ptrdiff_t n, int threads, Body&& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::ptrdiff_t>(n, 1))));
  if (workers == 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::ptrdiff_t lo = w * chunk;
    const std::ptrdiff_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace swarmflow
