#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mixlab {

// Worker cap: MIXLAB_THREADS if set (>=1), else hardware concurrency.
inline unsigned max_threads() {
  if (const char* env = std::getenv("MIXLAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, n_items).  Work units must write only to their own
// preassigned slots; reductions happen after the join, in index order, so the
// result does not depend on the worker count.
inline void parallel_for(std::size_t n_items, const std::function<void(std::size_t)>& fn) {
  unsigned workers = max_threads();
  if (workers <= 1 || n_items <= 1) {
    for (std::size_t i = 0; i < n_items; ++i) fn(i);
    return;
  }
  if (workers > n_items) workers = static_cast<unsigned>(n_items);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n_items; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mixlab
