#pragma once

// Deterministic parallel reductions over quadrature nodes. Nodes are split
// into fixed-size blocks; each block accumulates in node order and the block
// results are combined pairwise, so the result never depends on the number
// of threads and matches the serial path bit for bit.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "dralloc/transform.hpp"

namespace dralloc::detail {

inline constexpr std::size_t kReduceBlock = 32;

template <class F>
double reduce_scalar(std::size_t K, F&& term, bool parallel) {
  std::vector<double> vals(K);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < K; ++k) vals[k] = term(k);
  } else {
    for (std::size_t k = 0; k < K; ++k) vals[k] = term(k);
  }
  return pairwise_sum(vals);
}

/// add_term(k, acc) adds node k's contribution into acc (length dim).
template <class F>
std::vector<double> reduce_vector(std::size_t K, std::size_t dim, F&& add_term, bool parallel) {
  const std::size_t B = (K + kReduceBlock - 1) / kReduceBlock;
  if (B == 0) return std::vector<double>(dim, 0.0);
  std::vector<std::vector<double>> blocks(B, std::vector<double>(dim, 0.0));
  auto run_block = [&](std::size_t b) {
    const std::size_t end = std::min(K, (b + 1) * kReduceBlock);
    for (std::size_t k = b * kReduceBlock; k < end; ++k) add_term(k, blocks[b]);
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < B; ++b) run_block(b);
  } else {
    for (std::size_t b = 0; b < B; ++b) run_block(b);
  }
  for (std::size_t stride = 1; stride < B; stride *= 2)
    for (std::size_t b = 0; b + stride < B; b += 2 * stride)
      for (std::size_t i = 0; i < dim; ++i) blocks[b][i] += blocks[b + stride][i];
  return std::move(blocks[0]);
}

}  // namespace dralloc::detail
