#pragma once

#include <cstdint>
#include <functional>

namespace cavreg {

// Execution mode for the data-parallel kernels. Every parallel loop has a
// serial twin that produces bit-identical results; the serial path is the
// reference the tests compare against.
enum class Exec { Serial, Parallel };

// Number of worker threads the Parallel mode will use (OpenMP). Resolves the
// CAVREG_THREADS environment variable once; 0 means "OpenMP default".
int configured_threads();

// Apply fn(i) for i in [0, n). Parallel mode uses OpenMP with dynamic
// scheduling; results must be written to disjoint slots by the caller.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  Exec mode);

}  // namespace cavreg
