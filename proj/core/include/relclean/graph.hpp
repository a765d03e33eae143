#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>

#include "relclean/matrix.hpp"

namespace relclean::graph {

using numerics::DenseMatrix;
using numerics::SparseMatrix;

// Per-class affinity over one extended example set: symmetric, zero
// diagonal, edge (i,j) stored only when i and j are mutual top-k_nn
// neighbors and their clipped cosine is positive.
struct AffinityGraph {
  std::size_t n = 0;
  std::size_t k_nn = 0;
  SparseMatrix a;  // n x n
};

// Row-stochastic propagation matrix D^{-1}(A+I) with D = diag((A+I)1).
// Every row sums to 1 and the diagonal is positive, so isolated vertices
// keep their own features.
struct NormalizedAffinity {
  std::size_t n = 0;
  SparseMatrix m;  // n x n
};

// Symmetric normalization D^{-1/2} A D^{-1/2} with D the degree matrix of A
// itself. Zero-degree vertices contribute all-zero rows and columns.
struct SymNormalizedAffinity {
  std::size_t n = 0;
  SparseMatrix m;  // n x n
};

// Exact brute-force reciprocal-kNN graph over the columns of `features`
// (d x N, one example per column). Features are L2-normalized internally;
// similarity ties break by ascending column index, k is clamped to N-1,
// and edge weights are the clipped inner products of the unit vectors.
// `ids` (optional, may be empty) names examples in error messages.
AffinityGraph build_affinity(const DenseMatrix& features, std::size_t k_nn,
                             std::span<const std::string> ids = {});

NormalizedAffinity normalize_row_stochastic(const AffinityGraph& g);

SymNormalizedAffinity normalize_symmetric(const AffinityGraph& g);

// Debug edge list as CSV rows `src_id,dst_id,weight` (6 decimals), one row
// per undirected edge, src index < dst index. Falls back to column indices
// when `ids` is empty.
void write_edge_csv(const AffinityGraph& g, std::span<const std::string> ids, std::ostream& out);

}  // namespace relclean::graph
