#pragma once

#include <cstddef>
#include <functional>

namespace vfem {

/// Worker count used by batched element formation. Defaults to 1.
void set_num_threads(unsigned n) noexcept;
unsigned num_threads() noexcept;

/// Calls fn(begin, end) over [0, n) split into chunks of at most `chunk`
/// items. Chunks are distributed over num_threads() workers; the chunk
/// boundaries do not depend on the worker count.
void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace vfem
