#pragma once

#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace slicevol {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition of [0, n); f(i) must only touch state owned by
// index i. Results are independent of the thread count by construction.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([begin, end, &f] {
      for (std::size_t i = begin; i < end; ++i) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Pairwise summation: deterministic order, and far better conditioned
// than a running sum on long Monte Carlo vectors.
inline double tree_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return tree_sum(v.first(half)) + tree_sum(v.subspan(half));
}

}  // namespace slicevol
