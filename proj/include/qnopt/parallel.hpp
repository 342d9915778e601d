#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qnopt {

std::size_t default_worker_count() noexcept;

// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are
// claimed dynamically; if any item throws, the exception of the lowest
// failing index is rethrown after all threads join, so error reporting does
// not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body &&body) {
  if (count == 0) {
    return;
  }
  workers = std::clamp<std::size_t>(workers, 1, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = count;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) {
        return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  {
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      threads.emplace_back(worker);
    }
    worker();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

} // namespace qnopt
