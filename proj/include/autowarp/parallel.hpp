#pragma once

#include <cstddef>
#include <functional>

namespace autowarp {

/// Cap on worker threads used by every parallel loop in the library.
/// 0 means "hardware concurrency".
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// results must be written to index-owned slots, so output never depends on
/// the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace autowarp
