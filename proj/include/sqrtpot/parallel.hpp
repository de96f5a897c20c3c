// Deterministic index-space parallel loop. Work is split by index, results
// are written to index-addressed slots, so the output never depends on the
// thread schedule. The SQRTPOT_THREADS environment variable (positive
// integer) caps the worker count; absent or invalid it defaults to the
// hardware concurrency.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sqrtpot {

inline int max_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("SQRTPOT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      hw = std::min<unsigned>(hw, unsigned(v));
      return int(std::max(1L, std::min(long(hw), v)));
    }
  }
  return int(hw);
}

/// Runs fn(i) for i in [0, n). Exceptions are captured and the first one
/// (lowest index) is rethrown after all workers join.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(max_threads(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::pair<int, std::exception_ptr>> errors;
  std::mutex err_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          errors.emplace_back(i, std::current_exception());
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (!errors.empty()) {
    auto first = std::min_element(
        errors.begin(), errors.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    std::rethrow_exception(first->second);
  }
}

}  // namespace sqrtpot
