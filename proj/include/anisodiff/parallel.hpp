#pragma once

// Minimal data-parallel loop used by the solver and the quadrature
// reductions.  Worker count comes from ANISODIFF_THREADS (0 or unset =
// hardware concurrency).  Reductions stay deterministic: callers accumulate
// per-chunk partials and combine them in chunk order.

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace anisodiff {

inline int worker_count() {
  int n = 0;
  if (const char* env = std::getenv("ANISODIFF_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (...) {
      n = 0;
    }
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return n;
}

/// Invokes fn(i) for i in [0, count), split into contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int workers = worker_count();
  if (workers == 1 || count < 1024) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (count + static_cast<std::size_t>(workers) - 1) /
                            static_cast<std::size_t>(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    if (lo >= count) break;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Deterministic parallel sum of fn(i) over [0, count): fixed chunking,
/// partials combined in chunk order regardless of worker count.
template <typename Fn>
double parallel_sum(std::size_t count, Fn&& fn) {
  constexpr std::size_t kChunk = 4096;
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(nchunks, [&](std::size_t c) {
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(count, lo + kChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += fn(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace anisodiff
