#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace rarexact {

/// Default worker count: RAREXACT_THREADS if set, else hardware concurrency.
int default_threads();
void set_default_threads(int threads);

/// Runs f(begin, end) over a static contiguous partition of [0, count).
template <class F>
void parallel_for(std::size_t count, F&& f, int threads = 0) {
  if (threads <= 0) threads = default_threads();
  const std::size_t grain = 4096;
  std::size_t workers = std::min<std::size_t>(threads, (count + grain - 1) / grain);
  if (workers <= 1) {
    if (count > 0) f(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo < hi) pool.emplace_back([&f, lo, hi] { f(lo, hi); });
  }
  f(std::size_t{0}, std::min(count, chunk));
  for (auto& th : pool) th.join();
}

}  // namespace rarexact
