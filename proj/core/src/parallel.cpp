#include "egoav/parallel.hpp"

#include <atomic>

namespace egoav {

namespace {
std::atomic<int> g_workers{1};
}

int worker_threads() { return g_workers.load(std::memory_order_relaxed); }

void set_worker_threads(int n) {
  if (n < 1) n = 1;
  g_workers.store(n, std::memory_order_relaxed);
}

}  // namespace egoav
