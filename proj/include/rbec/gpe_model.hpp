#pragma once

#include <cstdint>
#include <memory>
#include <mutex>

#include "rbec/assembly.hpp"
#include "rbec/fespace.hpp"
#include "rbec/sparse.hpp"

namespace rbec {

/// Assembled operators of one model on one space, plus a cache of the
/// density-weighted mass W(u) keyed by the field version.
class GpeOperators {
 public:
  GpeOperators(SpacePtr space, ModelParams params);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const ModelParams& params() const { return params_; }
  const RealSparse& mass() const { return mass_; }
  const RealSparse& stiffness() const { return stiffness_; }
  const ComplexSparse& r_form() const { return r_form_; }
  /// V_R >= 0 at every quadrature point.
  bool a4_holds() const { return a4_holds_; }

  /// W(u) for a field on this space; reassembled only when u changed.
  std::shared_ptr<const RealSparse> weighted_mass(const FeField& u) const;

  /// A_R + beta W(u), with the pattern of A_R.
  ComplexSparse gpe_matrix(const FeField& u) const;

 private:
  SpacePtr space_;
  ModelParams params_;
  RealSparse mass_;
  RealSparse stiffness_;
  ComplexSparse r_form_;
  bool a4_holds_ = true;

  mutable std::mutex cache_mutex_;
  mutable std::uint64_t cached_version_ = 0;
  mutable std::shared_ptr<const RealSparse> cached_w_;
};

/// Throws std::invalid_argument unless `u` lives on the space of `ops`.
void require_space(const GpeOperators& ops, const FeField& u, const char* who);

/// u^H M v
Complex mass_inner(const RealSparse& mass, const FeField& u, const FeField& v);
double mass_norm(const RealSparse& mass, const FeField& u);

/// int |w|^4 by the high-order rule of the space.
double quartic_integral(const FeField& w);

/// E(w) = 1/2 w^H A_R w + beta/4 int |w|^4
double energy(const GpeOperators& ops, const FeField& w);

/// E(w) - E(u), evaluated from w - u so that differences far below the size
/// of E itself keep their relative accuracy.
double energy_difference(const GpeOperators& ops, const FeField& u, const FeField& w);

/// E(w) - E(u) for u, w on the unit sphere, written as
///   Re <r, d> + 1/2 <(A_|u| - lambda M) d, d> + beta/4 int (|w|^2 - |u|^2)^2
/// with d = w - u and r = A_|u| u - lambda M u. Uses Re <M u, d> = -|d|^2 / 2,
/// so no term of order one cancels; accurate down to differences of order
/// |r|^2 where the unconstrained formula loses them to rounding.
double sphere_energy_difference(const GpeOperators& ops, const FeField& u, const FeField& w);

/// (A_R + beta W(u)) v
ComplexVector apply_gpe_operator(const GpeOperators& ops, const FeField& u, const FeField& v);

/// Re(u^H A_|u| u) / (u^H M u). Throws std::invalid_argument for a zero field.
double rayleigh_lambda(const GpeOperators& ops, const FeField& u);

/// E''(u) v = A_|u| v + (2 beta Re(u conj v) u, phi_i). Real-linear in v.
ComplexVector apply_second_derivative(const GpeOperators& ops, const FeField& u, const FeField& v);

/// Dual residual A_|u| u - lambda M u.
ComplexVector eigen_residual(const GpeOperators& ops, const FeField& u, double lambda);

/// Rescales u to unit M-norm without touching its phase.
FeField normalize(const FeField& u, const RealSparse& mass);

struct PhaseAlignment {
  FeField aligned;
  double theta = 0.0;
};

/// Returns e^{i theta} u_ref such that int u_h conj(e^{i theta} u_ref) is
/// real and nonnegative.
PhaseAlignment phase_align(const FeField& u_h, const FeField& u_ref, const RealSparse& mass);

/// True if every function of `coarse` is a function of `fine`.
bool is_nested(const FeSpace& coarse, const FeSpace& fine);

/// Exact interpolation matrix (fine interior dofs x coarse interior dofs).
TransferMatrix prolongation_matrix(const FeSpace& coarse, const FeSpace& fine);

/// Transfers for a multigrid hierarchy below `fine`: P2 -> P1 on the same
/// mesh (if applicable), then halving N_h while it stays even and the coarser
/// mesh keeps at least `min_subdivisions` cells per side.
std::vector<TransferMatrix> transfer_chain(const FeSpace& fine, int min_subdivisions = 4);

/// Coarse field represented in the fine space (exact nodal evaluation).
FeField prolongate(const FeField& coarse, const SpacePtr& fine);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;           ///< full H1 norm
  double h1_seminorm = 0.0;
};

/// Norms of u_h - u_ref after prolongating u_h to the space of u_ref. The
/// phase of the inputs is used as given.
ErrorNorms error_norms(const FeField& u_h, const FeField& u_ref, const RealSparse& fine_mass,
                       const RealSparse& fine_stiffness);

struct ErrorDecomposition {
  Complex a;           ///< int u_h conj(u)
  double c = 0.0;      ///< Re(a) - 1
  double v_norm = 0.0; ///< || u_h - a u ||
  double error_l2 = 0.0;
};

/// Splits u_h = a u + v. Throws NumericalError if |Im a| > 1e-10,
/// Re(a) differs from sqrt(1 - ||v||^2), or |c| > ||u_h - u||^2.
ErrorDecomposition error_decomposition(const FeField& u_h, const FeField& u, const RealSparse& mass);

struct IdentityTerms {
  double lhs = 0.0;        ///< lambda_h - lambda
  double quadratic = 0.0;  ///< <(A_|u| - lambda M) e, e>
  double density = 0.0;    ///< beta int (|u_h|^2 - |u|^2) |u_h|^2
  double residual() const;
};

/// Both sides of
///   lambda_h - lambda = <(A_|u| - lambda M)(u_h - u), u_h - u>
///                       + beta int (|u_h|^2 - |u|^2) |u_h|^2
/// with u_h already represented in the space of `ops` and phase-aligned to u.
IdentityTerms eigenvalue_identity(const GpeOperators& ops, double lambda_h, const FeField& u_h,
                                  double lambda, const FeField& u);

}  // namespace rbec
