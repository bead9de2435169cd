#pragma once

#include <cstddef>
#include <functional>

namespace strap {

/// Worker count used when the caller does not choose one: STRAP_THREADS if set to a
/// positive integer, otherwise the hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs body(i) for every i in [0, count) on up to `threads` workers. Work items are
/// claimed dynamically, so `body` must only write state owned by its index. The first
/// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace strap
