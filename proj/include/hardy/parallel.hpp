#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace hardy {

/// Runs body(i) for i in [0, n) on up to hardware_concurrency threads, in
/// contiguous blocks. Each index is handled by exactly one call, so output
/// written per index does not depend on scheduling.
template <class Body>
void parallel_for(std::ptrdiff_t n, Body&& body) {
  const std::ptrdiff_t workers =
      std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::thread::hardware_concurrency()), 1, 16);
  if (workers == 1 || n < 64) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    const std::ptrdiff_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace hardy
