#pragma once

#include <cstdint>
#include <functional>

namespace bbm {

// 0 means auto: BBM_THREADS if set, otherwise the hardware concurrency.
int resolve_threads(int requested);

// Calls body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots; the first exception thrown is rethrown here.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body);

}  // namespace bbm
