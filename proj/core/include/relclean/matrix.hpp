#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "relclean/errors.hpp"

namespace relclean::numerics {

// Dense row-major matrix of doubles. All public operations keep entries
// finite; a kernel that would produce NaN/Inf raises NumericalFailure
// instead.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Column r (rows_ strided values), copied out.
  std::vector<double> column(std::size_t c) const;

  bool all_finite() const noexcept;

  // Raises NumericalFailure mentioning `context` if any entry is NaN/Inf.
  void require_finite(const std::string& context) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Sparse matrix in compressed row form. Column indices are strictly
// increasing within each row and explicit zeros are never stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  // Builds from triplets; duplicates are rejected and zeros dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  // Entries of row r as parallel (column, value) spans.
  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }

  double coeff(std::size_t r, std::size_t c) const;

  // y = S x, rows processed in ascending order.
  std::vector<double> multiply(std::span<const double> x) const;

  DenseMatrix to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

// out = X * S with out[:,i] = sum_j X[:,j] * S[j,i]. Accumulation runs over
// rows j of S in ascending order, so results are reproducible bit for bit.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x);

// C = A * B.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// C = A^T * B.
DenseMatrix matmul_transposed_a(const DenseMatrix& a, const DenseMatrix& b);

// C = A * B^T.
DenseMatrix matmul_transposed_b(const DenseMatrix& a, const DenseMatrix& b);

// Copies the selected columns of `m` into a new matrix, in the given order.
DenseMatrix gather_columns(const DenseMatrix& m, std::span<const std::size_t> indices);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace relclean::numerics
