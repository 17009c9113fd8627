#include "rbec/spectrum.hpp"

#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rbec/diagnostics.hpp"
#include "rbec/errors.hpp"
#include "rbec/iterative.hpp"
#include "rbec/multigrid.hpp"

namespace rbec {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Loose solves with E''(u) - sigma M, preconditioned by a complex V-cycle
// for A_|u| - sigma M (the coupling term dropped). If the shifted operator is
// not positive (u not a ground state of the discrete problem), the shift drops
// to zero: E''(u) >= A_|u| >= 0 when V_R >= 0.
class ShiftedSolver {
 public:
  ShiftedSolver(const GpeOperators& ops, const FeField& u, const RealLinearOperator& op, double sigma,
                const SpectrumOptions& opts)
      : ops_(ops), u_(u), op_(op), n_(op.complex_dimension), opts_(opts) {
    try {
      build(sigma);
    } catch (const BreakdownError&) {
      fall_back(sigma);
    }
  }

  void operator()(const MatrixXd& in, MatrixXd& out) const {
    try {
      solve(in, out);
    } catch (const BreakdownError&) {
      if (sigma_ == 0.0) throw;
      fall_back(sigma_);
      solve(in, out);
    }
  }

 private:
  void build(double sigma) const {
    sigma_ = sigma;
    shifted_ = linear_combination(1.0, op_.matrix, -sigma, op_.mass);
    ComplexSparse a = ops_.gpe_matrix(u_);
    auto av = a.values();
    const auto mv = ops_.mass().values();
    for (std::size_t k = 0; k < av.size(); ++k) av[k] -= sigma * mv[k];
    mg_ = std::make_unique<Multigrid<Complex>>(transfer_chain(ops_.space()), a);
  }

  void fall_back(double sigma) const {
    std::ostringstream msg;
    msg << "spectrum: shifted operator with sigma = " << sigma << " is not positive definite; using sigma = 0";
    warn(msg.str());
    build(0.0);
  }

  void solve(const MatrixXd& in, MatrixXd& out) const {
    out.setZero(in.rows(), in.cols());
    CgOptions<double> cg;
    cg.tol = opts_.precond_tol;
    cg.max_iter = opts_.precond_max_iter;
    auto apply = [this](std::span<const double> x, std::span<double> y) { shifted_.multiply(x, y); };
    auto prec = [this](std::span<const double> r, std::span<double> z) {
      ComplexVector rc(static_cast<std::size_t>(n_)), zc(static_cast<std::size_t>(n_));
      for (int i = 0; i < n_; ++i) rc[i] = Complex(r[i], r[n_ + i]);
      (*mg_)(std::span<const Complex>(rc), std::span<Complex>(zc));
      for (int i = 0; i < n_; ++i) {
        z[i] = zc[i].real();
        z[n_ + i] = zc[i].imag();
      }
    };
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
      std::span<const double> rhs(in.col(j).data(), static_cast<std::size_t>(in.rows()));
      std::span<double> sol(out.col(j).data(), static_cast<std::size_t>(out.rows()));
      try {
        conjugate_gradient<double>(apply, prec, rhs, sol, cg);
      } catch (const ConvergenceError&) {
        // A partial solve is still a usable preconditioner action.
      }
    }
  }

  const GpeOperators& ops_;
  const FeField& u_;
  const RealLinearOperator& op_;
  int n_;
  const SpectrumOptions& opts_;
  mutable double sigma_ = 0.0;
  mutable RealSparse shifted_;
  mutable std::unique_ptr<Multigrid<Complex>> mg_;
};

BlockPencil make_pencil(const RealLinearOperator& op, const ShiftedSolver& solver) {
  BlockPencil pencil;
  pencil.dimension = op.matrix.size();
  pencil.apply_a = [&op](const MatrixXd& in, MatrixXd& out) { apply_blockwise(op.matrix, in, out); };
  pencil.apply_b = [&op](const MatrixXd& in, MatrixXd& out) { apply_blockwise(op.mass, in, out); };
  pencil.apply_prec = [&solver](const MatrixXd& in, MatrixXd& out) { solver(in, out); };
  return pencil;
}

EigenOptions eigen_options(const SpectrumOptions& opts) {
  EigenOptions eo;
  eo.tol = opts.tol;
  eo.max_iter = opts.max_iter;
  eo.extra_vectors = opts.extra_vectors;
  eo.seed = opts.seed;
  eo.progress = opts.progress;
  return eo;
}

}  // namespace

VectorXd to_real(std::span<const Complex> v) {
  const auto n = static_cast<Eigen::Index>(v.size());
  VectorXd x(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = v[i].real();
    x(n + i) = v[i].imag();
  }
  return x;
}

ComplexVector to_complex_vector(const Eigen::Ref<const VectorXd>& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("to_complex_vector: odd length");
  const Eigen::Index n = x.size() / 2;
  ComplexVector v(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(x(i), x(n + i));
  return v;
}

RealLinearOperator build_second_derivative_matrix(const GpeOperators& ops, const FeField& u) {
  require_space(ops, u, "build_second_derivative_matrix");
  const ComplexSparse h = ops.gpe_matrix(u);
  const double beta2 = 2.0 * ops.params().beta;
  const auto phase = assemble_phase_masses(u);
  const RealSparse& m = ops.mass();
  if (!phase[0].same_pattern(m) || !h.same_pattern(to_complex(m))) {
    throw std::logic_error("build_second_derivative_matrix: unexpected sparsity pattern");
  }

  const int n = m.size();
  const auto off = m.row_offsets();
  const auto col = m.columns();
  const auto hv = h.values();
  const auto rr = phase[0].values();
  const auto ri = phase[1].values();
  const auto ii = phase[2].values();
  const auto mv = m.values();

  std::vector<int> offsets(2 * static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals, mvals;
  cols.reserve(4 * col.size());
  vals.reserve(4 * col.size());
  std::vector<int> moffsets(2 * static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> mcols;
  mcols.reserve(2 * col.size());
  mvals.reserve(2 * col.size());

  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < n; ++i) {
      const int row = block * n + i;
      for (int k = off[i]; k < off[i + 1]; ++k) {
        cols.push_back(col[k]);
        // Row block 0: Re H + 2b Wrr; row block 1: Im H + 2b Wri.
        vals.push_back(block == 0 ? hv[k].real() + beta2 * rr[k] : hv[k].imag() + beta2 * ri[k]);
      }
      for (int k = off[i]; k < off[i + 1]; ++k) {
        cols.push_back(n + col[k]);
        vals.push_back(block == 0 ? -hv[k].imag() + beta2 * ri[k] : hv[k].real() + beta2 * ii[k]);
      }
      offsets[row + 1] = static_cast<int>(cols.size());
      for (int k = off[i]; k < off[i + 1]; ++k) {
        mcols.push_back(block * n + col[k]);
        mvals.push_back(mv[k]);
      }
      moffsets[row + 1] = static_cast<int>(mcols.size());
    }
  }
  RealLinearOperator op;
  op.complex_dimension = n;
  op.matrix = RealSparse(2 * n, std::move(offsets), std::move(cols), std::move(vals));
  op.mass = RealSparse(2 * n, std::move(moffsets), std::move(mcols), std::move(mvals));
  return op;
}

MatrixXd phase_directions(const GpeOperators& ops, const FeField& u) {
  require_space(ops, u, "phase_directions");
  const double norm = mass_norm(ops.mass(), u);
  if (!(norm > 0.0)) throw std::invalid_argument("phase_directions: zero field");
  const Eigen::Index n = static_cast<Eigen::Index>(u.size());
  MatrixXd q(2 * n, 2);
  q.col(0) = to_real(u.coefficients()) / norm;
  // i u = -Im u + i Re u
  q.col(1).head(n) = -q.col(0).tail(n);
  q.col(1).tail(n) = q.col(0).head(n);
  return q;
}

void deflate(const MatrixXd& q, const RealSparse& b, MatrixXd& x) {
  MatrixXd bx;
  apply_blockwise(b, x, bx);
  x -= q * (q.transpose() * bx);
}

SpectrumResult lowest_spectrum(const GpeOperators& ops, const FeField& u, int count, const SpectrumOptions& opts) {
  if (count < 1) throw std::invalid_argument("lowest_spectrum: count must be positive");
  const RealLinearOperator op = build_second_derivative_matrix(ops, u);
  SpectrumResult res;
  res.lambda = rayleigh_lambda(ops, u);
  const ShiftedSolver solver(ops, u, op, opts.shift_fraction * res.lambda, opts);
  const EigenResult eig = lobpcg(make_pencil(op, solver), count, eigen_options(opts));

  res.eigenvalues = eig.values;
  res.eigenvectors = eig.vectors;
  res.residuals = eig.residuals;
  res.iterations = eig.iterations;

  // |int v_1 conj(i u)| = |(i u)^H M v_1| with unit-normalized u.
  const MatrixXd q = phase_directions(ops, u);
  MatrixXd bv;
  apply_blockwise(op.mass, eig.vectors.leftCols(1), bv);
  const double re = q.col(0).dot(bv.col(0));
  const double im = q.col(1).dot(bv.col(0));
  res.overlap_iu = std::hypot(re, im);
  double max_res = 0.0;
  for (double r : res.residuals) max_res = std::max(max_res, r);
  res.gap = count > 1 ? res.eigenvalues[1] - res.eigenvalues[0] : 0.0;
  const bool value_ok = std::abs(res.eigenvalues[0] - res.lambda) <= opts.tol_rel * res.lambda;
  const bool gap_ok = count > 1 && res.gap > 10.0 * max_res * std::abs(res.eigenvalues[1]);
  res.quasi_isolated = value_ok && res.overlap_iu >= opts.overlap_threshold && gap_ok;
  return res;
}

InfSupResult check_tangent_inf_sup(const GpeOperators& ops, const FeField& u, double lambda,
                                   const SpectrumOptions& opts) {
  const RealLinearOperator op = build_second_derivative_matrix(ops, u);
  const ShiftedSolver solver(ops, u, op, opts.shift_fraction * lambda, opts);
  const MatrixXd q = phase_directions(ops, u);
  const EigenResult eig = lobpcg(make_pencil(op, solver), 1, eigen_options(opts), q);
  InfSupResult r;
  r.mu = eig.values[0];
  r.value = eig.values[0] - lambda;
  r.residual = eig.residuals[0];
  r.iterations = eig.iterations;
  return r;
}

void write_spectrum_report(std::ostream& out, const SpectrumResult& result) {
  const auto old = out.precision(12);
  out << "# index eigenvalue\n";
  for (std::size_t i = 0; i < result.eigenvalues.size(); ++i) out << i + 1 << ' ' << result.eigenvalues[i] << '\n';
  out << "# lambda mu1 gap overlap_iu quasi_isolated\n";
  out << result.lambda << ' ' << result.eigenvalues.front() << ' ' << result.gap << ' ' << result.overlap_iu << ' '
      << (result.quasi_isolated ? 1 : 0) << '\n';
  out.precision(old);
}

}  // namespace rbec
