#include "relclean/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace relclean::graph {

namespace {

// Columns of `features`, each scaled to unit norm.
DenseMatrix normalize_columns(const DenseMatrix& features, std::span<const std::string> ids) {
  const std::size_t d = features.rows();
  const std::size_t n = features.cols();
  DenseMatrix unit(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) sq += features(r, j) * features(r, j);
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      const std::string name = j < ids.size() ? ids[j] : std::to_string(j);
      throw ContractViolation("build_affinity: zero-norm feature vector for example '" + name +
                              "'");
    }
    for (std::size_t r = 0; r < d; ++r) unit(r, j) = features(r, j) / norm;
  }
  return unit;
}

}  // namespace

AffinityGraph build_affinity(const DenseMatrix& features, std::size_t k_nn,
                             std::span<const std::string> ids) {
  const std::size_t n = features.cols();
  if (n == 0 || features.rows() == 0) {
    throw ContractViolation("build_affinity: empty feature matrix");
  }
  const DenseMatrix unit = normalize_columns(features, ids);
  const std::size_t k_eff = std::min(k_nn, n - 1);

  // Pairwise cosines; sims[i*n+j] = v_i . v_j.
  std::vector<double> sims(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sims[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < features.rows(); ++r) s += unit(r, i) * unit(r, j);
      sims[i * n + j] = s;
      sims[j * n + i] = s;
    }
  }

  // Top-k neighbor lists by (similarity desc, index asc).
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = sims[i * n + a];
      const double sb = sims[i * n + b];
      return sa != sb ? sa > sb : a < b;
    });
    neighbors[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_eff));
    std::sort(neighbors[i].begin(), neighbors[i].end());
  }

  std::vector<SparseMatrix::Triplet> triplets;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) {
      if (j < i) continue;  // handled from the smaller endpoint
      if (!std::binary_search(neighbors[j].begin(), neighbors[j].end(), i)) continue;
      const double w = std::max(sims[i * n + j], 0.0);
      if (w == 0.0) continue;
      triplets.push_back({i, j, w});
      triplets.push_back({j, i, w});
    }
  }

  AffinityGraph g;
  g.n = n;
  g.k_nn = k_nn;
  g.a = SparseMatrix::from_triplets(n, n, std::move(triplets));
  return g;
}

NormalizedAffinity normalize_row_stochastic(const AffinityGraph& g) {
  const std::size_t n = g.n;
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (double v : g.a.row_values(i)) acc += v;
    degree[i] = acc + 1.0;  // self-connection
  }
  std::vector<SparseMatrix::Triplet> triplets;
  triplets.reserve(g.a.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = g.a.row_cols(i);
    auto vals = g.a.row_values(i);
    bool diag_done = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (!diag_done && cols[k] > i) {
        triplets.push_back({i, i, 1.0 / degree[i]});
        diag_done = true;
      }
      triplets.push_back({i, cols[k], vals[k] / degree[i]});
    }
    if (!diag_done) triplets.push_back({i, i, 1.0 / degree[i]});
  }
  NormalizedAffinity out;
  out.n = n;
  out.m = SparseMatrix::from_triplets(n, n, std::move(triplets));
  return out;
}

SymNormalizedAffinity normalize_symmetric(const AffinityGraph& g) {
  const std::size_t n = g.n;
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (double v : g.a.row_values(i)) acc += v;
    inv_sqrt[i] = acc > 0.0 ? 1.0 / std::sqrt(acc) : 0.0;  // d=0 convention
  }
  std::vector<SparseMatrix::Triplet> triplets;
  triplets.reserve(g.a.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = g.a.row_cols(i);
    auto vals = g.a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      triplets.push_back({i, cols[k], inv_sqrt[i] * vals[k] * inv_sqrt[cols[k]]});
    }
  }
  SymNormalizedAffinity out;
  out.n = n;
  out.m = SparseMatrix::from_triplets(n, n, std::move(triplets));
  return out;
}

void write_edge_csv(const AffinityGraph& g, std::span<const std::string> ids, std::ostream& out) {
  out << "src_id,dst_id,weight\n";
  char buf[32];
  for (std::size_t i = 0; i < g.n; ++i) {
    auto cols = g.a.row_cols(i);
    auto vals = g.a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] < i) continue;
      const std::string src = i < ids.size() ? ids[i] : std::to_string(i);
      const std::string dst = cols[k] < ids.size() ? ids[cols[k]] : std::to_string(cols[k]);
      std::snprintf(buf, sizeof(buf), "%.6f", vals[k]);
      out << src << ',' << dst << ',' << buf << '\n';
    }
  }
}

}  // namespace relclean::graph
