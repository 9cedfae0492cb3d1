#pragma once

#include <atomic>
#include <exception>
#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

namespace cabsim {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items pull
// from a shared counter; callers must write results into per-index slots so
// that output does not depend on scheduling. The first exception raised by
// any item is rethrown on the calling thread.
template <typename Fn>
void parallel_for(int64_t count, int workers, Fn&& fn) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int nthreads = static_cast<int>(std::min<int64_t>(workers, count));
  std::atomic<int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nthreads));
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace cabsim
