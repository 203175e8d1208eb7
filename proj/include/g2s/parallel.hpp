#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace g2s {

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
// one thread per chunk. threads <= 1 runs inline on the calling thread.
template <class Fn>
void parallel_for(std::ptrdiff_t n, int threads, Fn&& fn) {
  const std::ptrdiff_t workers = std::min<std::ptrdiff_t>(std::max(threads, 1), std::max<std::ptrdiff_t>(n, 1));
  if (workers <= 1) {
    fn(std::ptrdiff_t{0}, n);
    return;
  }
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (std::ptrdiff_t w = 1; w < workers; ++w) {
    const std::ptrdiff_t b = w * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::ptrdiff_t{0}, std::min(n, chunk));
}

}  // namespace g2s
