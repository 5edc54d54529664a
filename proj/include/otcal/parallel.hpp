#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace otcal {

enum class ExecPolicy { Serial, Parallel };

// Grid sweeps are embarrassingly parallel; the serial path is kept as the
// reference implementation for testing and benchmarking.
template <typename Fn>
void parallel_for(std::ptrdiff_t count, Fn&& fn,
                  ExecPolicy policy = ExecPolicy::Parallel) {
#ifdef _OPENMP
  if (policy == ExecPolicy::Parallel) {
    // Exceptions may not leave an OpenMP region; capture and rethrow.
    std::exception_ptr first;
    std::mutex mtx;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
    return;
  }
#else
  (void)policy;
#endif
  for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
}

}  // namespace otcal
