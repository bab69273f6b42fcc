#pragma once

#include <cstddef>
#include <functional>

namespace tanglekit {

// Number of worker threads: min(hardware_concurrency, TANGLEKIT_THREADS).
// TANGLEKIT_THREADS=1 forces serial execution.
unsigned thread_budget();

// Runs fn(i) for i in [0, n). Work items must be independent; outputs should
// be written to pre-sized slots so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace tanglekit
