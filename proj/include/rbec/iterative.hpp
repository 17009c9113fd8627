#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rbec/errors.hpp"
#include "rbec/sparse.hpp"

namespace rbec {

template <class T>
struct CgOptions {
  double tol = 1e-10;  ///< relative residual ||b - Ax|| / ||b||
  int max_iter = 10000;
  /// Called after every update with the iteration count and the iterate.
  std::function<void(int, std::span<const T>)> monitor;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for a Hermitian positive definite
/// operator. `apply_a(x, y)` computes y = A x, `apply_prec(r, z)` computes
/// z = P r for an HPD preconditioner P. `x` holds the initial guess on entry.
///
/// Throws BreakdownError on nonpositive curvature and ConvergenceError when
/// max_iter is exhausted.
template <class T, class ApplyA, class ApplyPrec>
CgReport conjugate_gradient(ApplyA&& apply_a, ApplyPrec&& apply_prec, std::span<const T> b,
                            std::span<T> x, const CgOptions<T>& opts) {
  const std::size_t n = b.size();
  if (x.size() != n) throw std::invalid_argument("conjugate_gradient: dimension mismatch");

  const double b_norm = norm2(b);
  CgReport report;
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), T{});
    return report;
  }

  std::vector<T> r(n), z(n), p(n), q(n);
  apply_a(std::span<const T>(x), std::span<T>(q));
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double res = norm2<T>(r) / b_norm;
  report.relative_residual = res;
  if (res <= opts.tol) return report;

  double rho_old = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    apply_prec(std::span<const T>(r), std::span<T>(z));
    const double rho = real_part(dot<T>(r, z));
    if (!(rho > 0.0)) throw BreakdownError("conjugate_gradient: preconditioner is not positive definite");

    if (it == 1) {
      p = z;
    } else {
      const double beta = rho / rho_old;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rho_old = rho;

    apply_a(std::span<const T>(p), std::span<T>(q));
    const double curvature = real_part(dot<T>(p, q));
    if (!(curvature > 0.0)) {
      throw BreakdownError("conjugate_gradient: nonpositive curvature " + std::to_string(curvature) +
                           " at iteration " + std::to_string(it) + "; operator is not HPD");
    }
    const double alpha = rho / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (opts.monitor) opts.monitor(it, std::span<const T>(x.data(), n));

    res = norm2<T>(r) / b_norm;
    report.iterations = it;
    report.relative_residual = res;
    if (res <= opts.tol) return report;
  }
  throw ConvergenceError("conjugate_gradient: no convergence in " + std::to_string(opts.max_iter) +
                             " iterations, relative residual " + std::to_string(res),
                         res, opts.max_iter);
}

/// Inverse of the (real, positive) diagonal.
template <class T>
class JacobiPreconditioner {
 public:
  explicit JacobiPreconditioner(const SparseOperator<T>& a) : inv_diag_(a.size()) {
    const auto d = a.diagonal_entries();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double di = real_part(d[i]);
      if (!(di > 0.0)) {
        throw BreakdownError("Jacobi preconditioner: nonpositive diagonal entry at row " +
                             std::to_string(i) + "; operator is not HPD");
      }
      inv_diag_[i] = 1.0 / di;
    }
  }

  void operator()(std::span<const T> r, std::span<T> z) const {
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
  }

 private:
  std::vector<double> inv_diag_;
};

/// Jacobi-preconditioned CG solve of A x = b, starting from `x` (in/out).
template <class T>
CgReport solve_hpd(const SparseOperator<T>& a, std::span<const T> b, std::span<T> x,
                   const CgOptions<T>& opts) {
  if (b.size() != static_cast<std::size_t>(a.size())) {
    throw std::invalid_argument("solve_hpd: dimension mismatch");
  }
  JacobiPreconditioner<T> prec(a);
  auto apply = [&a](std::span<const T> in, std::span<T> out) { a.multiply(in, out); };
  return conjugate_gradient<T>(apply, prec, b, x, opts);
}

/// Jacobi-preconditioned CG solve of A x = b from a zero initial guess.
template <class T>
std::vector<T> solve_hpd(const SparseOperator<T>& a, std::span<const T> b, double tol,
                         int max_iter, CgReport* report = nullptr) {
  std::vector<T> x(b.size());
  CgOptions<T> opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  const auto rep = solve_hpd<T>(a, b, std::span<T>(x), opts);
  if (report) *report = rep;
  return x;
}

template <class T>
std::vector<T> solve_hpd(const SparseOperator<T>& a, const std::vector<T>& b, double tol,
                         int max_iter, CgReport* report = nullptr) {
  return solve_hpd<T>(a, std::span<const T>(b), tol, max_iter, report);
}

}  // namespace rbec
