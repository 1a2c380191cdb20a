#pragma once

// Index-parallel loop whose results do not depend on scheduling: each index
// writes its own slot, and aggregation happens afterwards in index order.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lelong {

inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// Calls body(i) for i in [0, n). The first exception (lowest index) is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = default_threads()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mtx;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mtx);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// out[i] = f(i), computed with parallel_for.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f, unsigned threads = default_threads()) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); }, threads);
  return out;
}

}  // namespace lelong
