#pragma once

// Index-addressed parallel loops. Work item i always computes the same thing
// regardless of which thread runs it, so results do not depend on the worker
// count as long as callers write into slot i.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace censornet {

inline int default_workers() {
  if (const char* env = std::getenv("CENSORNET_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline int& worker_setting() {
  static int workers = default_workers();
  return workers;
}

inline void set_workers(int n) { worker_setting() = std::max(1, n); }
inline int workers() { return worker_setting(); }

// Set on pool threads so that nested loops run inline instead of spawning
// another pool per item.
inline bool& in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int n_workers = workers()) {
  if (n == 0) return;
  std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, n_workers)), n);
  if (in_parallel_region()) w = 1;
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    const bool was = in_parallel_region();
    in_parallel_region() = true;
    struct Reset {
      bool v;
      ~Reset() { in_parallel_region() = v; }
    } reset{was};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(w - 1);
  for (std::size_t k = 1; k < w; ++k) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace censornet
