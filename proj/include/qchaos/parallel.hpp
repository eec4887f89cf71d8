#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qchaos {

// QCHAOS_WORKERS overrides the hardware thread count.
inline int worker_count() {
  if (const char* env = std::getenv("QCHAOS_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// out[i] = f(i). Results land in fixed slots so the output never depends on scheduling.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f, int workers = 0) {
  std::vector<R> out(n);
  if (workers <= 0) workers = worker_count();
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(n);
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = static_cast<int>(std::min<std::size_t>(workers, n));
  for (int w = 0; w < nt; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

// Sum of f(i) over [0, n) with a fixed chunk layout: the result does not
// depend on the worker count. f(i) must return a value supporting +=.
template <class T, class F>
T chunked_sum(std::size_t n, F&& f, std::size_t chunks = 64) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  auto parts = parallel_map<T>(chunks, [&](std::size_t c) {
    const std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
    T acc = f(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += f(i);
    return acc;
  });
  T total = parts[0];
  for (std::size_t c = 1; c < parts.size(); ++c) total += parts[c];
  return total;
}

}  // namespace qchaos
