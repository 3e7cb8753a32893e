#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace losstest {

/// Worker count: LOSSTEST_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("LOSSTEST_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}  // namespace detail

/// Calls fn(i) for every i in [0, count). Work is split into contiguous
/// blocks; fn must only write to slots owned by i. The first exception thrown
/// by any worker is rethrown on the calling thread. Nested calls run serially
/// on the worker that issued them.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t workers = thread_count()) {
  workers = std::min(workers, count);
  if (workers <= 1 || detail::inside_parallel_region) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        detail::inside_parallel_region = true;
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace losstest
