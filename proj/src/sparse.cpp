#include "rbec/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rbec {

template <class T>
SparseOperator<T>::SparseOperator(int n, std::vector<int> row_offsets, std::vector<int> columns,
                                  std::vector<T> values)
    : n_(n),
      row_offsets_(std::move(row_offsets)),
      columns_(std::move(columns)),
      values_(std::move(values)) {
  if (n < 0 || row_offsets_.size() != static_cast<std::size_t>(n) + 1 || row_offsets_.front() != 0 ||
      static_cast<std::size_t>(row_offsets_.back()) != columns_.size() ||
      columns_.size() != values_.size()) {
    throw std::invalid_argument("SparseOperator: inconsistent CSR arrays");
  }
  for (int i = 0; i < n; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      throw std::invalid_argument("SparseOperator: decreasing row offsets at row " + std::to_string(i));
    }
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (columns_[k] < 0 || columns_[k] >= n) {
        throw std::invalid_argument("SparseOperator: column index out of range in row " +
                                    std::to_string(i));
      }
      if (k > row_offsets_[i] && columns_[k] <= columns_[k - 1]) {
        throw std::invalid_argument("SparseOperator: columns not strictly increasing in row " +
                                    std::to_string(i));
      }
    }
  }
}

template <class T>
SparseOperator<T> SparseOperator<T>::from_triplets(int n, std::vector<Triplet<T>> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw std::invalid_argument("from_triplets: index out of range");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet<T>& a, const Triplet<T>& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> cols;
  std::vector<T> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
  }
  for (int i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  return SparseOperator(n, std::move(offsets), std::move(cols), std::move(vals));
}

template <class T>
SparseOperator<T> SparseOperator<T>::identity(int n) {
  std::vector<T> ones(static_cast<std::size_t>(n), T(1));
  return diagonal(ones);
}

template <class T>
SparseOperator<T> SparseOperator<T>::diagonal(std::span<const T> entries) {
  const int n = static_cast<int>(entries.size());
  std::vector<int> offsets(static_cast<std::size_t>(n) + 1);
  std::vector<int> cols(static_cast<std::size_t>(n));
  for (int i = 0; i <= n; ++i) offsets[i] = i;
  for (int i = 0; i < n; ++i) cols[i] = i;
  return SparseOperator(n, std::move(offsets), std::move(cols),
                        std::vector<T>(entries.begin(), entries.end()));
}

template <class T>
void SparseOperator<T>::multiply(std::span<const T> x, std::span<T> y) const {
  if (x.size() != static_cast<std::size_t>(n_) || y.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("matvec: dimension mismatch (matrix " + std::to_string(n_) +
                                ", x " + std::to_string(x.size()) + ", y " +
                                std::to_string(y.size()) + ")");
  }
  const int* offs = row_offsets_.data();
  const int* cols = columns_.data();
  const T* vals = values_.data();
  for (int i = 0; i < n_; ++i) {
    T s{};
    for (int k = offs[i]; k < offs[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

template <class T>
std::vector<T> SparseOperator<T>::operator*(std::span<const T> x) const {
  std::vector<T> y(static_cast<std::size_t>(n_));
  multiply(x, y);
  return y;
}

template <class T>
std::ptrdiff_t SparseOperator<T>::find(int i, int j) const {
  const auto first = columns_.begin() + row_offsets_[i];
  const auto last = columns_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return -1;
  return it - columns_.begin();
}

template <class T>
T SparseOperator<T>::coeff(int i, int j) const {
  const auto pos = find(i, j);
  return pos < 0 ? T{} : values_[pos];
}

template <class T>
std::vector<T> SparseOperator<T>::diagonal_entries() const {
  std::vector<T> d(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) d[i] = coeff(i, i);
  return d;
}

template <class T>
double SparseOperator<T>::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

template <class T>
double SparseOperator<T>::hermitian_defect() const {
  double defect = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const int j = columns_[k];
      defect = std::max(defect, std::abs(values_[k] - conj_if(coeff(j, i))));
    }
  }
  return defect;
}

template <class T>
bool SparseOperator<T>::is_hermitian(double rel_tol) const {
  return hermitian_defect() <= rel_tol * max_abs();
}

template <class T>
bool SparseOperator<T>::same_pattern(const SparseOperator& other) const {
  return n_ == other.n_ && row_offsets_ == other.row_offsets_ && columns_ == other.columns_;
}

template <class T>
SparseOperator<T> linear_combination(T a, const SparseOperator<T>& lhs, T b,
                                     const SparseOperator<T>& rhs) {
  if (lhs.size() != rhs.size()) throw std::invalid_argument("linear_combination: size mismatch");
  if (lhs.same_pattern(rhs)) {
    std::vector<T> vals(lhs.nnz());
    const auto lv = lhs.values();
    const auto rv = rhs.values();
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = a * lv[k] + b * rv[k];
    return SparseOperator<T>(lhs.size(),
                             std::vector<int>(lhs.row_offsets().begin(), lhs.row_offsets().end()),
                             std::vector<int>(lhs.columns().begin(), lhs.columns().end()),
                             std::move(vals));
  }
  std::vector<Triplet<T>> trips;
  trips.reserve(lhs.nnz() + rhs.nnz());
  for (int i = 0; i < lhs.size(); ++i) {
    for (int k = lhs.row_offsets()[i]; k < lhs.row_offsets()[i + 1]; ++k)
      trips.push_back({i, lhs.columns()[k], a * lhs.values()[k]});
    for (int k = rhs.row_offsets()[i]; k < rhs.row_offsets()[i + 1]; ++k)
      trips.push_back({i, rhs.columns()[k], b * rhs.values()[k]});
  }
  return SparseOperator<T>::from_triplets(lhs.size(), std::move(trips));
}

ComplexSparse to_complex(const RealSparse& a) {
  std::vector<Complex> vals(a.values().begin(), a.values().end());
  return ComplexSparse(a.size(), std::vector<int>(a.row_offsets().begin(), a.row_offsets().end()),
                       std::vector<int>(a.columns().begin(), a.columns().end()), std::move(vals));
}

std::vector<Complex> apply_real(const RealSparse& a, std::span<const Complex> x) {
  if (x.size() != static_cast<std::size_t>(a.size())) throw std::invalid_argument("apply_real: dimension mismatch");
  const auto off = a.row_offsets();
  const auto col = a.columns();
  const auto val = a.values();
  std::vector<Complex> y(x.size());
  for (int i = 0; i < a.size(); ++i) {
    double re = 0.0, im = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k) {
      re += val[k] * x[col[k]].real();
      im += val[k] * x[col[k]].imag();
    }
    y[i] = Complex(re, im);
  }
  return y;
}

template <class T>
std::vector<T> to_dense(const SparseOperator<T>& a) {
  const std::size_t n = static_cast<std::size_t>(a.size());
  std::vector<T> dense(n * n);
  for (int i = 0; i < a.size(); ++i)
    for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      dense[i * n + a.columns()[k]] = a.values()[k];
  return dense;
}

template class SparseOperator<double>;
template class SparseOperator<Complex>;
template SparseOperator<double> linear_combination(double, const SparseOperator<double>&, double,
                                                   const SparseOperator<double>&);
template SparseOperator<Complex> linear_combination(Complex, const SparseOperator<Complex>&, Complex,
                                                    const SparseOperator<Complex>&);
template std::vector<double> to_dense(const SparseOperator<double>&);
template std::vector<Complex> to_dense(const SparseOperator<Complex>&);

TransferMatrix::TransferMatrix(int rows, int cols, std::vector<int> row_offsets,
                               std::vector<int> columns, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      columns_(std::move(columns)),
      values_(std::move(values)) {
  if (rows < 0 || cols < 0 || row_offsets_.size() != static_cast<std::size_t>(rows) + 1 ||
      row_offsets_.front() != 0 || static_cast<std::size_t>(row_offsets_.back()) != columns_.size() ||
      columns_.size() != values_.size()) {
    throw std::invalid_argument("TransferMatrix: inconsistent CSR arrays");
  }
  for (int i = 0; i < rows; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (columns_[k] < 0 || columns_[k] >= cols ||
          (k > row_offsets_[i] && columns_[k] <= columns_[k - 1])) {
        throw std::invalid_argument("TransferMatrix: bad column index in row " + std::to_string(i));
      }
    }
  }
}

void TransferMatrix::check(std::size_t in, std::size_t out, int want_in, int want_out) {
  if (in != static_cast<std::size_t>(want_in) || out != static_cast<std::size_t>(want_out)) {
    throw std::invalid_argument("TransferMatrix: dimension mismatch");
  }
}

template <class T>
SparseOperator<T> TransferMatrix::galerkin(const SparseOperator<T>& a) const {
  if (a.size() != rows_) throw std::invalid_argument("galerkin: dimension mismatch");
  // Column-oriented view of P: for each fine row i, its coarse columns.
  std::vector<Triplet<T>> trips;
  trips.reserve(a.nnz() * 4);
  const auto aoff = a.row_offsets();
  const auto acol = a.columns();
  const auto aval = a.values();
  for (int i = 0; i < rows_; ++i) {
    for (int ka = aoff[i]; ka < aoff[i + 1]; ++ka) {
      const int j = acol[ka];
      const T v = aval[ka];
      for (int p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
        const double pi = values_[p];
        for (int q = row_offsets_[j]; q < row_offsets_[j + 1]; ++q) {
          trips.push_back({columns_[p], columns_[q], pi * v * values_[q]});
        }
      }
    }
  }
  return SparseOperator<T>::from_triplets(cols_, std::move(trips));
}

template SparseOperator<double> TransferMatrix::galerkin(const SparseOperator<double>&) const;
template SparseOperator<Complex> TransferMatrix::galerkin(const SparseOperator<Complex>&) const;

}  // namespace rbec
