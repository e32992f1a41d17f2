#pragma once

#include <cstddef>
#include <functional>

namespace nots {

/// Worker count used when a caller passes 0.
unsigned default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace nots
