#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace procshade {

inline unsigned default_worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 4 : n;
}

// Chunked parallel loop over [begin, end). Chunks are disjoint, so writes to
// per-index outputs are race-free and the result is schedule-independent.
inline void parallel_for(std::int64_t begin, std::int64_t end, unsigned threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body) {
  const std::int64_t n = end - begin;
  if (n <= 0) return;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    body(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::int64_t chunk = (n + threads - 1) / threads;
  for (unsigned i = 0; i < threads; ++i) {
    const std::int64_t lo = begin + chunk * i;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace procshade
