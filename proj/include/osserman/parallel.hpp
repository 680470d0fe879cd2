#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace osserman {

/// Worker count: hardware concurrency, capped by OSSERMAN_LAB_THREADS when
/// it holds a positive integer.
inline int worker_count() {
  int n = int(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("OSSERMAN_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && v > 0) n = std::min<long>(n, v);
  }
  return n;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception stops further work and is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::size_t(std::max(threads, 1)), 1,
                              std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace osserman
