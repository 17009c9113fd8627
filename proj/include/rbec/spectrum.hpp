#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "rbec/eigensolver.hpp"
#include "rbec/gpe_model.hpp"

namespace rbec {

/// E''(u) in real coordinates v = [Re v; Im v] (dimension 2n) together with
/// the matching block mass diag(M, M).
struct RealLinearOperator {
  RealSparse matrix;
  RealSparse mass;
  int complex_dimension = 0;
};

/// [Re v; Im v]
Eigen::VectorXd to_real(std::span<const Complex> v);
ComplexVector to_complex_vector(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Real 2n matrix whose quadratic form is Re<E''(u) v, v>:
/// blocks [Re H, -Im H; Im H, Re H] of H = A_R + beta W(u) plus
/// 2 beta [int Re(u)^2, int Re(u)Im(u); int Re(u)Im(u), int Im(u)^2] phi_i phi_j.
RealLinearOperator build_second_derivative_matrix(const GpeOperators& ops, const FeField& u);

struct SpectrumOptions {
  double tol = 1e-8;            ///< relative eigen-residual
  int max_iter = 1000;
  int extra_vectors = 8;
  double tol_rel = 1e-6;        ///< |mu_1 - lambda| <= tol_rel * lambda
  double overlap_threshold = 0.999;
  /// Preconditioner shift sigma = shift_fraction * lambda; the inner solves
  /// use E''(u) - sigma M, which is positive definite for sigma < mu_1.
  double shift_fraction = 0.9;
  double precond_tol = 1e-2;
  int precond_max_iter = 50;
  std::uint64_t seed = 0x5eed5eedULL;
  std::function<void(int, const std::vector<double>&)> progress;
};

struct SpectrumResult {
  std::vector<double> eigenvalues;  ///< ascending
  Eigen::MatrixXd eigenvectors;     ///< 2n x m, orthonormal in diag(M, M)
  std::vector<double> residuals;
  double lambda = 0.0;              ///< Rayleigh quotient of u
  double overlap_iu = 0.0;          ///< |int v_1 conj(i u)|
  double gap = 0.0;                 ///< mu_2 - mu_1 (0 if only one value)
  bool quasi_isolated = false;
  int iterations = 0;
};

/// Smallest `count` eigenvalues of E''(u) v = mu M v.
SpectrumResult lowest_spectrum(const GpeOperators& ops, const FeField& u, int count,
                               const SpectrumOptions& opts = {});

/// Orthonormal (in diag(M, M)) basis of span{u, iu} in real coordinates.
Eigen::MatrixXd phase_directions(const GpeOperators& ops, const FeField& u);

/// x <- x - Q Q^T B x for B-orthonormal columns Q.
void deflate(const Eigen::MatrixXd& q, const RealSparse& b, Eigen::MatrixXd& x);

struct InfSupResult {
  double value = 0.0;     ///< smallest eigenvalue of E''(u) - lambda M on the complement
  double mu = 0.0;        ///< the corresponding eigenvalue of E''(u)
  double residual = 0.0;
  int iterations = 0;
};

/// Smallest eigenvalue of E''(u) - lambda M restricted to the
/// diag(M, M)-orthogonal complement of span{u, iu}.
InfSupResult check_tangent_inf_sup(const GpeOperators& ops, const FeField& u, double lambda,
                                   const SpectrumOptions& opts = {});

/// `# index eigenvalue` table followed by the summary
/// `# lambda mu1 gap overlap_iu quasi_isolated` and its value line.
void write_spectrum_report(std::ostream& out, const SpectrumResult& result);

}  // namespace rbec
