#include "rbec/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "rbec/iterative.hpp"

namespace rbec {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Uniform doubles in [-1, 1) straight from the engine bits, so the initial
// block is identical across standard library implementations.
MatrixXd random_block(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  MatrixXd x(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      x(i, j) = static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0;
  return x;
}

// Returns a B-orthonormal basis of span(Z) (dropping numerically dependent
// directions) together with its images under B. Two passes for accuracy.
void b_orthonormalize(MatrixXd& z, MatrixXd& bz, const BlockPencil& pencil) {
  for (int pass = 0; pass < 2 && z.cols() > 0; ++pass) {
    MatrixXd gram = z.transpose() * bz;
    gram = 0.5 * (gram + gram.transpose());
    VectorXd d = gram.diagonal();
    for (int j = 0; j < d.size(); ++j) d(j) = d(j) > 0.0 ? 1.0 / std::sqrt(d(j)) : 0.0;
    const MatrixXd scaled = d.asDiagonal() * gram * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(scaled);
    const VectorXd& ev = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(ev.maxCoeff(), 0.0);
    std::vector<int> keep;
    for (int j = 0; j < ev.size(); ++j)
      if (ev(j) > cutoff && ev(j) > 0.0) keep.push_back(j);
    MatrixXd transform(z.cols(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      transform.col(c) = d.asDiagonal() * eig.eigenvectors().col(keep[c]) / std::sqrt(ev(keep[c]));
    z = z * transform;
    if (pass == 0) {
      bz = bz * transform;
    } else {
      bz.resize(z.rows(), z.cols());
      if (z.cols() > 0) pencil.apply_b(z, bz);
    }
  }
}

std::vector<double> column_residuals(const MatrixXd& ax, const MatrixXd& bx, const VectorXd& theta,
                                     MatrixXd& r) {
  r = ax - bx * theta.asDiagonal();
  std::vector<double> res(static_cast<std::size_t>(theta.size()));
  for (int j = 0; j < theta.size(); ++j) {
    const double scale = ax.col(j).norm() + std::abs(theta(j)) * bx.col(j).norm();
    res[j] = scale > 0.0 ? r.col(j).norm() / scale : r.col(j).norm();
  }
  return res;
}

}  // namespace

void project_out(const MatrixXd& y, const MatrixXd& by, MatrixXd& x) {
  if (y.cols() == 0 || x.cols() == 0) return;
  x -= y * (by.transpose() * x);
}

void apply_blockwise(const RealSparse& a, const MatrixXd& in, MatrixXd& out) {
  out.resize(in.rows(), in.cols());
  for (Eigen::Index j = 0; j < in.cols(); ++j) {
    a.multiply(std::span<const double>(in.col(j).data(), static_cast<std::size_t>(in.rows())),
               std::span<double>(out.col(j).data(), static_cast<std::size_t>(out.rows())));
  }
}

EigenResult lobpcg(const BlockPencil& pencil, int count, const EigenOptions& opts,
                   const MatrixXd& constraints) {
  const int n = pencil.dimension;
  const int ncons = static_cast<int>(constraints.cols());
  if (count < 1) throw std::invalid_argument("lobpcg: count must be positive");
  if (count > n - ncons) {
    throw std::invalid_argument("lobpcg: requested " + std::to_string(count) +
                                " pairs from a space of dimension " + std::to_string(n - ncons));
  }
  if (ncons > 0 && constraints.rows() != n) throw std::invalid_argument("lobpcg: constraint size mismatch");

  MatrixXd by;
  if (ncons > 0) pencil.apply_b(constraints, by);
  auto constrain = [&](MatrixXd& block) {
    project_out(constraints, by, block);
    project_out(constraints, by, block);
  };

  const int block = std::min(count + std::max(opts.extra_vectors, 0), n - ncons);

  MatrixXd x = random_block(n, block, opts.seed);
  constrain(x);
  MatrixXd bx(n, block);
  pencil.apply_b(x, bx);
  b_orthonormalize(x, bx, pencil);
  if (x.cols() < count) throw NumericalError("lobpcg: initial block is rank deficient");

  MatrixXd ax;
  pencil.apply_a(x, ax);
  VectorXd theta;
  {
    MatrixXd g = x.transpose() * ax;
    g = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g);
    theta = eig.eigenvalues();
    x = x * eig.eigenvectors();
    ax = ax * eig.eigenvectors();
    bx = bx * eig.eigenvectors();
  }
  const int k = static_cast<int>(x.cols());

  MatrixXd p, ap, bp, r;
  std::vector<double> res;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    res = column_residuals(ax, bx, theta, r);
    if (opts.progress) opts.progress(iter, res);

    bool done = true;
    for (int j = 0; j < count; ++j) done = done && res[j] <= opts.tol;
    if (done || iter == opts.max_iter) {
      EigenResult out;
      out.iterations = iter;
      out.values.assign(theta.data(), theta.data() + count);
      out.vectors = x.leftCols(count);
      out.residuals.assign(res.begin(), res.begin() + count);
      if (!done) {
        throw EigenConvergenceError(
            "lobpcg: no convergence in " + std::to_string(opts.max_iter) + " iterations", out.residuals);
      }
      return out;
    }

    std::vector<int> active;
    for (int j = 0; j < k; ++j)
      if (res[j] > opts.tol) active.push_back(j);
    const int na = static_cast<int>(active.size());

    MatrixXd ra(n, na);
    for (int c = 0; c < na; ++c) ra.col(c) = r.col(active[c]);
    MatrixXd w(n, na);
    pencil.apply_prec(ra, w);

    const int np = p.cols() > 0 ? na : 0;
    MatrixXd z(n, na + np);
    z.leftCols(na) = w;
    for (int c = 0; c < np; ++c) z.col(na + c) = p.col(active[c]);
    constrain(z);
    // B-orthogonalise against the current Ritz block (twice).
    for (int pass = 0; pass < 2; ++pass) z -= x * (bx.transpose() * z);
    MatrixXd bz(n, z.cols());
    pencil.apply_b(z, bz);
    b_orthonormalize(z, bz, pencil);
    const int s = static_cast<int>(z.cols());

    MatrixXd az(n, s);
    if (s > 0) pencil.apply_a(z, az);

    // Rayleigh-Ritz on [X, Z].
    MatrixXd ga(k + s, k + s), gb(k + s, k + s);
    ga.topLeftCorner(k, k) = x.transpose() * ax;
    ga.topRightCorner(k, s) = x.transpose() * az;
    ga.bottomRightCorner(s, s) = z.transpose() * az;
    ga.bottomLeftCorner(s, k) = ga.topRightCorner(k, s).transpose();
    gb.topLeftCorner(k, k) = x.transpose() * bx;
    gb.topRightCorner(k, s) = x.transpose() * bz;
    gb.bottomRightCorner(s, s) = z.transpose() * bz;
    gb.bottomLeftCorner(s, k) = gb.topRightCorner(k, s).transpose();
    ga = 0.5 * (ga + ga.transpose());
    gb = 0.5 * (gb + gb.transpose());

    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(ga, gb);
    if (eig.info() != Eigen::Success) throw NumericalError("lobpcg: Rayleigh-Ritz step failed");
    const MatrixXd c = eig.eigenvectors().leftCols(k);
    theta = eig.eigenvalues().head(k);

    const MatrixXd cx = c.topRows(k);
    const MatrixXd cz = c.bottomRows(s);
    p = z * cz;
    ap = az * cz;
    bp = bz * cz;
    x = x * cx + p;
    ax = ax * cx + ap;
    bx = bx * cx + bp;
    if (iter % 10 == 9) {
      // Refresh the images to keep drift from accumulating.
      pencil.apply_a(x, ax);
      pencil.apply_b(x, bx);
    }
  }
  throw NumericalError("lobpcg: unreachable");
}

EigenResult lowest_eigenpairs(const RealSparse& a, const RealSparse& b, int count,
                              const EigenOptions& opts, const MatrixXd& constraints) {
  if (a.size() != b.size()) throw std::invalid_argument("lowest_eigenpairs: dimension mismatch");
  const RealSparse shifted =
      opts.precond_shift == 0.0 ? a : linear_combination(1.0, a, opts.precond_shift, b);
  const JacobiPreconditioner<double> jacobi(shifted);

  BlockPencil pencil;
  pencil.dimension = a.size();
  pencil.apply_a = [&a](const MatrixXd& in, MatrixXd& out) { apply_blockwise(a, in, out); };
  pencil.apply_b = [&b](const MatrixXd& in, MatrixXd& out) { apply_blockwise(b, in, out); };
  pencil.apply_prec = [&](const MatrixXd& in, MatrixXd& out) {
    out.setZero(in.rows(), in.cols());
    CgOptions<double> cg;
    cg.tol = opts.precond_tol;
    cg.max_iter = opts.precond_max_iter;
    auto apply = [&shifted](std::span<const double> v, std::span<double> y) { shifted.multiply(v, y); };
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
      std::span<const double> rhs(in.col(j).data(), static_cast<std::size_t>(in.rows()));
      std::span<double> sol(out.col(j).data(), static_cast<std::size_t>(out.rows()));
      try {
        conjugate_gradient<double>(apply, jacobi, rhs, sol, cg);
      } catch (const ConvergenceError&) {
        // A partially converged solve is still a valid preconditioner action.
      }
    }
  };
  return lobpcg(pencil, count, opts, constraints);
}

}  // namespace rbec
