#pragma once

#include <cstddef>
#include <functional>

namespace aduwt {

/// Process-wide cap on worker threads (the CLI --threads flag lands here).
/// 1 disables threading entirely.
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs fn(i) for i in [0, n), split across up to max_threads() workers in
/// contiguous chunks. Each index is handled exactly once, so element-wise
/// writes to preallocated storage are race-free and results do not depend
/// on the thread count. Reductions belong in a sequential pass afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace aduwt
