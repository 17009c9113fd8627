#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "rbec/vector_ops.hpp"

namespace rbec {

template <class T>
struct Triplet {
  int row;
  int col;
  T value;
};

/// Square matrix in compressed sparse row form with strictly increasing
/// column indices per row. T is double (real symmetric kinds) or Complex
/// (Hermitian kinds).
template <class T>
class SparseOperator {
 public:
  using value_type = T;

  SparseOperator() = default;

  /// Validates offsets and per-row strictly increasing columns.
  SparseOperator(int n, std::vector<int> row_offsets, std::vector<int> columns,
                 std::vector<T> values);

  /// Duplicate entries are summed; entries are ordered by (row, col) before
  /// summation so the result does not depend on triplet order.
  static SparseOperator from_triplets(int n, std::vector<Triplet<T>> triplets);
  static SparseOperator identity(int n);
  static SparseOperator diagonal(std::span<const T> entries);

  int size() const { return n_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const T> values() const { return values_; }
  std::span<T> values() { return values_; }

  /// y = A x, rows summed left to right.
  void multiply(std::span<const T> x, std::span<T> y) const;
  std::vector<T> operator*(std::span<const T> x) const;
  std::vector<T> operator*(const std::vector<T>& x) const { return *this * std::span<const T>(x); }

  /// Stored entry (i, j) or zero.
  T coeff(int i, int j) const;
  /// Position of (i, j) in values(), or -1.
  std::ptrdiff_t find(int i, int j) const;

  std::vector<T> diagonal_entries() const;
  double max_abs() const;
  /// max_ij |a_ij - conj(a_ji)|
  double hermitian_defect() const;
  bool is_hermitian(double rel_tol = 1e-12) const;
  bool same_pattern(const SparseOperator& other) const;

 private:
  int n_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> columns_;
  std::vector<T> values_;
};

using RealSparse = SparseOperator<double>;
using ComplexSparse = SparseOperator<Complex>;

/// a*A + b*B (patterns may differ).
template <class T>
SparseOperator<T> linear_combination(T a, const SparseOperator<T>& lhs, T b,
                                     const SparseOperator<T>& rhs);

/// Promote a real operator to the complex kind.
ComplexSparse to_complex(const RealSparse& a);

/// Real operator applied to a complex vector.
std::vector<Complex> apply_real(const RealSparse& a, std::span<const Complex> x);

/// Dense row-major copy (tests and small problems only).
template <class T>
std::vector<T> to_dense(const SparseOperator<T>& a);

/// Real rectangular CSR matrix for transfers between nested spaces. Applies
/// to real or complex vectors.
class TransferMatrix {
 public:
  TransferMatrix() = default;
  TransferMatrix(int rows, int cols, std::vector<int> row_offsets, std::vector<int> columns,
                 std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  /// y = P x
  template <class T>
  void apply(std::span<const T> x, std::span<T> y) const {
    check(x.size(), y.size(), cols_, rows_);
    for (int i = 0; i < rows_; ++i) {
      T s{};
      for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
      y[i] = s;
    }
  }

  /// y = P^T x
  template <class T>
  void apply_transpose(std::span<const T> x, std::span<T> y) const {
    check(x.size(), y.size(), rows_, cols_);
    std::fill(y.begin(), y.end(), T{});
    for (int i = 0; i < rows_; ++i)
      for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) y[columns_[k]] += values_[k] * x[i];
  }

  template <class T>
  std::vector<T> apply(const std::vector<T>& x) const {
    std::vector<T> y(static_cast<std::size_t>(rows_));
    apply<T>(std::span<const T>(x), std::span<T>(y));
    return y;
  }

  template <class T>
  std::vector<T> apply_transpose(const std::vector<T>& x) const {
    std::vector<T> y(static_cast<std::size_t>(cols_));
    apply_transpose<T>(std::span<const T>(x), std::span<T>(y));
    return y;
  }

  /// P^T A P for a square operator A on the row space.
  template <class T>
  SparseOperator<T> galerkin(const SparseOperator<T>& a) const;

 private:
  static void check(std::size_t in, std::size_t out, int want_in, int want_out);

  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

}  // namespace rbec
