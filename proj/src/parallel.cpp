#include "zo/parallel.hpp"

#include <atomic>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zo {

namespace {
int g_thread_cap = 0;
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  const int base = omp_get_max_threads();
  return (g_thread_cap > 0 && g_thread_cap < base) ? g_thread_cap : base;
#else
  return 1;
#endif
}

void set_max_threads(int n) { g_thread_cap = n; }

void parallel_for(std::uint64_t count, bool allow_parallel,
                  const std::function<void(std::uint64_t)>& f) {
#ifdef _OPENMP
  if (allow_parallel && count > 1 && max_threads() > 1) {
    // Exceptions must not escape the parallel region; keep the one thrown at
    // the smallest index so failure reporting stays deterministic.
    std::exception_ptr error = nullptr;
    std::atomic<std::uint64_t> error_index{count};
    const std::int64_t n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (std::int64_t i = 0; i < n; ++i) {
      const std::uint64_t idx = static_cast<std::uint64_t>(i);
      if (idx >= error_index.load(std::memory_order_relaxed)) continue;
      try {
        f(idx);
      } catch (...) {
        std::uint64_t expected = error_index.load(std::memory_order_relaxed);
        while (idx < expected &&
               !error_index.compare_exchange_weak(expected, idx, std::memory_order_relaxed)) {
        }
#pragma omp critical(zo_parallel_error)
        if (error_index.load(std::memory_order_relaxed) == idx) {
          error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#endif
  (void)allow_parallel;
  for (std::uint64_t i = 0; i < count; ++i) f(i);
}

}  // namespace zo
