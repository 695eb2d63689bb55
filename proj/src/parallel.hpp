#pragma once

// Index-parallel loop used by the sweeps. Every index writes only its own
// output slot, so results do not depend on the thread count.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sps::detail {

/// Worker count from SPS_THREADS, default 1.
inline unsigned thread_count() {
  const char* env = std::getenv("SPS_THREADS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(std::min<long>(v, 256)) : 1;
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
  const unsigned workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sps::detail
