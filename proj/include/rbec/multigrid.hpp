#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rbec/sparse.hpp"

namespace rbec {

/// Geometric V-cycle for Hermitian positive definite operators on a nested
/// hierarchy, usable as a CG preconditioner.
///
/// Coarse operators are Galerkin products P^T A P. The symbolic part of each
/// product is computed once, so refreshing the hierarchy for new values on the
/// same pattern costs a single pass over the products. One symmetric
/// Gauss-Seidel sweep before and after the coarse correction keeps the cycle
/// Hermitian; the coarsest level is solved by dense Cholesky.
template <class T>
class Multigrid {
 public:
  /// transfers[l] maps level l+1 (coarser) to level l; level 0 is `fine`.
  Multigrid(std::vector<TransferMatrix> transfers, const SparseOperator<T>& fine);
  ~Multigrid();
  Multigrid(Multigrid&&) noexcept;
  Multigrid& operator=(Multigrid&&) noexcept;

  /// Recomputes all levels for a fine operator with the original pattern.
  void update(const SparseOperator<T>& fine);

  int levels() const;
  const SparseOperator<T>& level_operator(int l) const;

  /// z = B r for one V(1,1) cycle B ~ A^{-1}.
  void operator()(std::span<const T> r, std::span<T> z) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

extern template class Multigrid<double>;
extern template class Multigrid<Complex>;

}  // namespace rbec
