#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ropetc {

// Static range split over worker threads. Each index is processed exactly
// once and workers touch disjoint output ranges, so results are identical
// for every thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn)
{
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace ropetc
