#pragma once

#include <cstddef>
#include <functional>

namespace riskflow {

/// Worker count: explicit override if set, else RISKFLOW_THREADS (0 = auto), else hardware concurrency.
std::size_t worker_count();

/// Process-wide override; 0 restores the environment/auto rule.
void set_worker_override(std::size_t workers);

/// Items per scheduling chunk. Fixed so chunk boundaries never depend on the worker count.
inline constexpr std::size_t kChunkSize = 256;

/**
 * Run body(begin, end) over [0, n) in fixed chunks. The first exception by chunk
 * order is rethrown after all workers stop.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace riskflow
