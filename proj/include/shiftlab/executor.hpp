#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace shiftlab {

/// Runs independent replication jobs on a fixed number of workers. Jobs write
/// into slots indexed by replication number and every reduction afterwards
/// walks the slots in index order, so results never depend on the worker
/// count or on completion order.
class Executor {
 public:
  explicit Executor(unsigned workers = 1) : workers_(std::max(1u, workers)) {}

  unsigned workers() const noexcept { return workers_; }

  /// Calls fn(r, worker) for r in [0, count). `worker` < workers() indexes
  /// per-worker scratch space.
  template <class Fn>
  void for_each(std::size_t count, Fn&& fn) const {
    if (workers_ == 1 || count < 2) {
      for (std::size_t r = 0; r < count; ++r) fn(r, 0u);
      return;
    }
    constexpr std::size_t kChunk = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&](unsigned worker) {
      try {
        for (;;) {
          const std::size_t start = next.fetch_add(kChunk);
          if (start >= count) break;
          const std::size_t stop = std::min(count, start + kChunk);
          for (std::size_t r = start; r < stop; ++r) fn(r, worker);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers_, count));
    pool.reserve(spawn);
    for (unsigned w = 0; w < spawn; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  /// Fills out[r] = fn(r, worker) for every replication.
  template <class T, class Fn>
  std::vector<T> map(std::size_t count, Fn&& fn) const {
    std::vector<T> out(count);
    for_each(count, [&](std::size_t r, unsigned w) { out[r] = fn(r, w); });
    return out;
  }

 private:
  unsigned workers_;
};

}  // namespace shiftlab
