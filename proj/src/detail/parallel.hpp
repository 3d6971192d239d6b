#pragma once

#include <cstddef>
#include <functional>

namespace fraclap::detail {

/// Process-wide worker count for data-parallel loops (>= 1).
void set_threads(int n);
int threads();

/// Runs f(i) for i in [0, n) on contiguous blocks. Each index is handled by
/// exactly one worker, so results never depend on the thread count as long
/// as f writes only to its own slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace fraclap::detail
