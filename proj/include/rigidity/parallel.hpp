#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rigidity {

// Worker count: RIGIDITY_FORGE_THREADS if set and positive, else hardware.
inline int worker_count() {
  static const int n = [] {
    if (const char* env = std::getenv("RIGIDITY_FORGE_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return n;
}

// Splits [begin, end) into contiguous chunks, one thread per chunk.
// Falls back to inline execution for small ranges.
inline void parallel_for(long begin, long end,
                         const std::function<void(long, long)>& body) {
  long n = end - begin;
  if (n <= 0) return;
  int threads = worker_count();
  if (threads <= 1 || n < 2 * threads) {
    body(begin, end);
    return;
  }
  long chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (long lo = begin; lo < end; lo += chunk) {
    long hi = std::min(end, lo + chunk);
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace rigidity
