#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace hdual {

namespace detail {
inline int& thread_setting() {
  static int n = [] {
    if (const char* env = std::getenv("HDUAL_THREADS")) {
      try {
        int v = std::stoi(env);
        if (v > 0) return v;
      } catch (...) {
      }
    }
    return 1;
  }();
  return n;
}
}  // namespace detail

/// Worker threads used by oracle chunks and independent chains (env HDUAL_THREADS, default 1).
inline int thread_count() { return detail::thread_setting(); }
inline void set_thread_count(int n) { detail::thread_setting() = std::max(1, n); }

/// Run body(i) for i in [0, n) on up to thread_count() threads. Callers write
/// results into slot i and combine slots in index order, so output does not
/// depend on the number of threads.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hdual
