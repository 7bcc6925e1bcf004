#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace maxlab {

// Resolves a requested worker count: 0 means "use MAXLAB_WORKERS or 1".
int resolve_workers(int requested);

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one thread per
// chunk. Chunk boundaries depend only on (n, workers); results must not depend
// on execution order, which holds for disjoint per-index writes.
void parallel_for(std::int64_t n, int workers,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

// Fixed-shape pairwise (tree) summation: splits at the midpoint recursively,
// blocks of <= 16 summed left to right. The result depends only on the input
// order, never on thread count.
double pairwise_sum(std::span<const double> v);

}  // namespace maxlab
