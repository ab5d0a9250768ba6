#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace arwmass {

/// Worker count: ARWMASS_THREADS if set (>= 1), else hardware concurrency.
int worker_count();

/// Overrides the worker count for this process; 0 restores the default.
void set_worker_count(int workers);

/// Runs body(i) for i in [0, n). Work is split into contiguous blocks and
/// calls made from inside a worker run serially. When several indices throw,
/// the exception of the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Collects body(i) into a vector, in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& body) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = body(i); });
  return out;
}

}  // namespace arwmass
