#pragma once

#include <functional>

namespace radiff {

/// Process-wide worker count for parallel loops (1 = serial). All reductions
/// in the library run in a fixed order, so results do not depend on this.
void set_threads(int n);
int threads();

/// Split [0, n) into contiguous chunks and run fn(begin, end) on each, using
/// up to threads() workers. Chunk boundaries depend only on n and the worker
/// count, and no chunk writes overlap, so output is deterministic.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace radiff
