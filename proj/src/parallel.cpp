#include "cavreg/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <mutex>

namespace cavreg {

int configured_threads() {
  static const int value = [] {
    if (const char* env = std::getenv("CAVREG_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return 0;
  }();
  return value;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  Exec mode) {
  if (n <= 0) return;
  if (mode == Exec::Serial || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }

  // Exceptions may not cross an OpenMP region: capture the first one and
  // rethrow after the join.
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int threads = configured_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cavreg
