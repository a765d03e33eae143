#include "relclean/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace relclean::numerics {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ContractViolation("DenseMatrix: data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
  }
}

std::vector<double> DenseMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void DenseMatrix::require_finite(const std::string& context) const {
  if (!all_finite()) {
    throw NumericalFailure(context + ": matrix contains non-finite entries");
  }
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw ContractViolation("SparseMatrix: triplet (" + std::to_string(t.row) + "," +
                              std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
    if (!std::isfinite(t.value)) {
      throw NumericalFailure("SparseMatrix: non-finite triplet value");
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.row_offsets_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    if (i > 0 && triplets[i].row == triplets[i - 1].row && triplets[i].col == triplets[i - 1].col) {
      throw ContractViolation("SparseMatrix: duplicate entry at (" +
                              std::to_string(triplets[i].row) + "," +
                              std::to_string(triplets[i].col) + ")");
    }
    if (triplets[i].value == 0.0) continue;
    m.col_indices_.push_back(triplets[i].col);
    m.values_.push_back(triplets[i].value);
    ++m.row_offsets_[triplets[i].row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m(n, n);
  m.col_indices_.resize(n);
  m.values_.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.col_indices_[i] = i;
    m.row_offsets_[i + 1] = i + 1;
  }
  return m;
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_offsets_[r] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw ContractViolation("SparseMatrix::multiply: vector length " + std::to_string(x.size()) +
                            " != cols " + std::to_string(cols_));
  }
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      acc += values_[k] * x[col_indices_[k]];
    }
    y[r] = acc;
  }
  return y;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      d(r, col_indices_[k]) = values_[k];
    }
  }
  return d;
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x) {
  if (s.rows() != s.cols() || x.cols() != s.cols()) {
    throw ContractViolation("spmm: S must be NxN with X lxN, got S " + std::to_string(s.rows()) +
                            "x" + std::to_string(s.cols()) + ", X " + std::to_string(x.rows()) +
                            "x" + std::to_string(x.cols()));
  }
  const std::size_t l = x.rows();
  DenseMatrix out(l, x.cols());
  auto offsets = s.row_offsets();
  auto cols = s.col_indices();
  auto vals = s.values();
  for (std::size_t j = 0; j < s.rows(); ++j) {
    for (std::size_t k = offsets[j]; k < offsets[j + 1]; ++k) {
      const std::size_t i = cols[k];
      const double w = vals[k];
      for (std::size_t r = 0; r < l; ++r) {
        out(r, i) += x(r, j) * w;
      }
    }
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("matmul: inner dimensions disagree");
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c(i, j) += aik * b(k, j);
      }
    }
  }
  return c;
}

DenseMatrix matmul_transposed_a(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ContractViolation("matmul_transposed_a: inner dimensions disagree");
  }
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c(i, j) += aki * b(k, j);
      }
    }
  }
  return c;
}

DenseMatrix matmul_transposed_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ContractViolation("matmul_transposed_b: inner dimensions disagree");
  }
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a(i, k) * b(j, k);
      }
      c(i, j) = acc;
    }
  }
  return c;
}

DenseMatrix gather_columns(const DenseMatrix& m, std::span<const std::size_t> indices) {
  DenseMatrix out(m.rows(), indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= m.cols()) {
      throw ContractViolation("gather_columns: index " + std::to_string(indices[j]) +
                              " out of range");
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out(r, j) = m(r, indices[j]);
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace relclean::numerics
