#pragma once

#include <cstddef>
#include <functional>

namespace sigscore {

/// Worker count for compute pools. Reads SIGSCORE_THREADS on every call;
/// 0, unset or unparsable means hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. If any call
/// throws, the exception from the smallest failing index is rethrown after
/// all workers have joined, so failures are reported deterministically.
/// Calls made from inside a pool worker run inline on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers);

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  parallel_for(n, body, worker_count());
}

}  // namespace sigscore
