#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tonepanel {

inline constexpr const char* kVersion = "0.1.0";

/// Error type for every recoverable failure in the library. Messages are
/// stable strings that callers (and tests) can match on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Shortest decimal representation that parses back to the same double.
/// Keeps CSV round-trips lossless without printing 17 digits everywhere.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline int worker_count(std::size_t n_tasks) {
  unsigned n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("TONEPANEL_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  if (n == 0) n = 1;
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(n_tasks, 1)));
}

/// Runs fn(i) for i in [0, n) on a small thread pool. Tasks must not share
/// mutable state; results are written by index so output order is stable.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int workers = worker_count(n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail
}  // namespace tonepanel
