#pragma once

// Minimal fork-join helper for replicate loops.  Work items must write
// to disjoint outputs; with counter-based RNG streams the result is
// independent of the thread count and schedule.

#include <cstddef>
#include <thread>
#include <vector>

namespace arflab {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  threads = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace arflab
