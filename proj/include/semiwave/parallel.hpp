#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace semiwave {

/// Process-wide worker count used by parallel_map; 0 means hardware concurrency.
inline std::atomic<unsigned>& thread_count_setting() {
  static std::atomic<unsigned> value{0};
  return value;
}

inline void set_thread_count(unsigned n) { thread_count_setting() = n; }

inline unsigned thread_count() {
  const unsigned n = thread_count_setting();
  return n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n;
}

/// Applies f to 0..count-1 on a small thread pool. Results are stored by index,
/// so the output never depends on scheduling. The first exception (lowest index)
/// is rethrown after all workers finish.
template <typename F>
auto parallel_map(std::size_t count, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> results(count);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = f(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace semiwave
