#ifndef STABOPT_PARALLEL_HPP
#define STABOPT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace stabopt {

namespace detail {
inline std::atomic<int> g_threads{0};
}

// Process-wide worker count. 0 means hardware concurrency.
inline void set_thread_count(int n) { detail::g_threads.store(n < 0 ? 0 : n); }

inline int thread_count() {
  int n = detail::g_threads.load();
  if (n == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    n = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return n;
}

// Static-chunk parallel map over [0, n). Chunks are assigned by index, so
// results are independent of the worker count as long as fn(i) only writes
// slot i of its output.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int workers = thread_count();
  if (workers <= 1 || n < 4096) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t per = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    std::size_t b = static_cast<std::size_t>(w) * per;
    std::size_t e = std::min(n, b + per);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] {
      for (std::size_t i = b; i < e; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace stabopt

#endif
