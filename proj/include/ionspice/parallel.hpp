#pragma once

#include <cstddef>
#include <functional>

namespace ionspice {

/// Worker count: IONSPICE_THREADS when set and non-zero, else the hardware
/// concurrency (at least 1).
[[nodiscard]] unsigned thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() workers. Every index
/// runs exactly once; the first exception thrown is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ionspice
