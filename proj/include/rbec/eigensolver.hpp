#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rbec/sparse.hpp"

namespace rbec {

struct EigenOptions {
  /// Per-pair stopping rule ||A v - mu B v|| <= tol * (||A v|| + |mu| ||B v||).
  double tol = 1e-8;
  int max_iter = 2000;
  /// Block size is count + extra_vectors (guard vectors speed up the tail).
  int extra_vectors = 5;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  /// Preconditioner: approximate (A + shift * B)^{-1}, which must be SPD.
  double precond_shift = 0.0;
  double precond_tol = 1e-2;
  int precond_max_iter = 400;
  /// Optional progress hook: iteration and current residuals of the block.
  std::function<void(int, const std::vector<double>&)> progress;
};

struct EigenResult {
  std::vector<double> values;    ///< ascending
  Eigen::MatrixXd vectors;       ///< n x count, B-orthonormal columns
  std::vector<double> residuals; ///< relative residual per pair
  int iterations = 0;
};

/// Symmetric-definite pencil given by block operators, for callers whose
/// operators are not plain sparse matrices.
struct BlockPencil {
  int dimension = 0;
  std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)> apply_a;
  std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)> apply_b;
  std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)> apply_prec;
};

/// Lowest `count` eigenpairs of A v = mu B v by block preconditioned
/// conjugate-gradient Rayleigh-Ritz iteration (LOBPCG with soft locking).
///
/// `constraints` (n x c, B-orthonormal) restricts the search to the
/// B-orthogonal complement of its columns. Throws EigenConvergenceError with
/// the attained residuals when max_iter is exhausted.
EigenResult lobpcg(const BlockPencil& pencil, int count, const EigenOptions& opts,
                   const Eigen::MatrixXd& constraints = Eigen::MatrixXd());

/// Sparse front end. The preconditioner is a loose Jacobi-CG solve with
/// A + precond_shift * B.
EigenResult lowest_eigenpairs(const RealSparse& a, const RealSparse& b, int count,
                              const EigenOptions& opts = {},
                              const Eigen::MatrixXd& constraints = Eigen::MatrixXd());

/// x <- x - Y (Y^T B x) for B-orthonormal Y (column-wise on a block).
void project_out(const Eigen::MatrixXd& y, const Eigen::MatrixXd& by, Eigen::MatrixXd& x);

/// Applies a sparse operator to each column of a block.
void apply_blockwise(const RealSparse& a, const Eigen::MatrixXd& in, Eigen::MatrixXd& out);

}  // namespace rbec
