#pragma once

#include <cstddef>
#include <vector>

#include "dycore/simd/kernels.hpp"

namespace dycore::simd {

const KernelTable* avx2_table_unchecked();

namespace detail {

// Splits the vectors into fixed chunks, reduces each with chunk_fn, then combines
// chunk results with a fixed pairwise tree.
template <class ChunkFn>
double chunked_dot(std::size_t n, const double* x, const double* y, ChunkFn chunk_fn) {
  if (n == 0) return 0.0;
  const std::size_t chunks = (n + kDotChunk - 1) / kDotChunk;
  double local[64];
  std::vector<double> heap;
  double* partial = local;
  if (chunks > 64) {
    heap.resize(chunks);
    partial = heap.data();
  }
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = c * kDotChunk;
    const std::size_t len = (lo + kDotChunk <= n) ? kDotChunk : n - lo;
    partial[c] = chunk_fn(len, x + lo, y + lo);
  }
  return pairwise_sum(partial, chunks);
}

}  // namespace detail
}  // namespace dycore::simd
