#pragma once

#include <cstddef>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace barostat {

/// Caps the worker count used by every parallel loop in the library.
/// Values < 1 are treated as 1.
void set_thread_count(int n);
int thread_count() noexcept;

/// Runs fn(k) for k in [0, n). Loops only ever write to slot k, so the
/// result is independent of the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 2048) {
  if (thread_count() <= 1 || n < 2 * grain) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, grain),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t k = r.begin(); k != r.end(); ++k) fn(k);
                    });
}

}  // namespace barostat
