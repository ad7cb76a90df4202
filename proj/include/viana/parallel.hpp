#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace viana {

/// Applies fn(i) for i in [0, count).  Work is split into contiguous blocks
/// over `workers` threads; fn must only write to state owned by sample i
/// (e.g. a result slot), so the outcome is identical for any worker count.
template <typename Fn>
void for_each_sample(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  unsigned n = workers;
  if (std::size_t(n) > count) n = unsigned(count);
  std::vector<std::thread> pool;
  pool.reserve(n);
  std::size_t chunk = (count + n - 1) / n;
  for (unsigned w = 0; w < n; ++w) {
    std::size_t lo = std::size_t(w) * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace viana
