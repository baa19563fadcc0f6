#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace dlotrack {

/// Worker count for internal loops. DLOTRACK_THREADS caps it; unset or
/// invalid means hardware concurrency.
inline std::size_t thread_count() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DLOTRACK_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return std::min<std::size_t>(hw, static_cast<std::size_t>(v));
    } catch (...) {
    }
  }
  return hw;
}

/// Runs fn(i) for i in [0, n) split into contiguous blocks. Each index is
/// handled by exactly one worker, so results written per index do not
/// depend on the schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_per_worker = 1) {
  std::size_t workers = std::min(thread_count(), std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_per_worker)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    std::size_t lo = w * block;
    std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, block); ++i) fn(i);
  for (auto& t : pool) t.join();
}

}  // namespace dlotrack
