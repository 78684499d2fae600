// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace sparsekern {

/// Caps worker threads used by the engine. 0 restores the default, which is
/// SPARSEKERN_THREADS when set and the hardware concurrency otherwise.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits [0, n) into at most thread_limit() contiguous ranges of at least
/// `min_grain` items (always at least one range).
std::vector<Range> split_range(std::size_t n, std::size_t min_grain);

/// Runs task(i) for i in [0, count); blocks until all finish. Tasks must own
/// disjoint outputs. The first exception thrown by any task is rethrown.
void parallel_tasks(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace sparsekern
