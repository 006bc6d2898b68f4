#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mfe {

/// Worker count: explicit value if positive, else MFE_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

/// Calls body(begin, end) on contiguous chunks of [0, n). Chunks are disjoint
/// so results written per index do not depend on the worker count.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), std::max<std::size_t>(n, 1));
  if (workers <= 1 || n < 1024) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mfe
