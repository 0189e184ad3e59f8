#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace tensorcert {

/// Resolve a --threads style knob: 0 means all hardware threads.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Parallel map over [0, count). Work items must be independent; callers
/// write results into pre-sized slots so aggregation order is fixed by
/// index, never by scheduling.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& body) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace tensorcert
