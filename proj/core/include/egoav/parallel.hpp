#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace egoav {

// Process-wide worker count for data-parallel kernels. 1 disables threading.
int worker_threads();
void set_worker_threads(int n);

// Chunked parallel loop over [0, n). Each index runs on exactly one worker
// with the same serial per-index code and disjoint writes, so results are
// bitwise identical for any thread count.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(worker_threads(), n);
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace egoav
