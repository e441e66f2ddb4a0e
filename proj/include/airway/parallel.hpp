#pragma once

#include <cstddef>
#include <functional>

namespace airway {

/// Worker count used by the data-parallel kernels. 0 selects
/// std::thread::hardware_concurrency().
void set_num_threads(unsigned n);
unsigned num_threads() noexcept;

/// Splits [0, n) into contiguous chunks and calls fn(begin, end) on each,
/// possibly concurrently. Nested calls run serially. Callers write only to
/// disjoint per-index outputs, so results do not depend on the thread count.
/// When several chunks throw, the exception of the lowest chunk propagates.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace airway
