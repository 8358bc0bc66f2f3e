#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace daq {

/// Runs fn(i) for i in [0, n) on `workers` threads. Work items are claimed
/// from a shared counter; fn must only write to slots owned by index i. If
/// any call throws, the exception from the lowest failing index is rethrown
/// after all threads join, so failures are reported deterministically.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn &&fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n)
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(workers, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t)
      pool.emplace_back(body);
  }
  if (error)
    std::rethrow_exception(error);
}

} // namespace daq
