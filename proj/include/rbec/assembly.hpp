#pragma once

#include <array>

#include "rbec/fespace.hpp"
#include "rbec/sparse.hpp"

namespace rbec {

/// Physical parameters of the rotating condensate with harmonic trap
/// V(x) = (gamma_x^2 x1^2 + gamma_y^2 x2^2) / 2.
struct ModelParams {
  double beta = 0.0;       ///< interaction strength, >= 0
  double omega = 0.0;      ///< angular velocity
  double gamma_x = 1.0;
  double gamma_y = 1.0;
  double half_width = 1.0; ///< domain [-R, R]^2

  double potential(const Point2& x) const {
    return 0.5 * (gamma_x * gamma_x * x.x1 * x.x1 + gamma_y * gamma_y * x.x2 * x.x2);
  }
  /// V_R = V - Omega^2 |x|^2 / 4
  double rotating_potential(const Point2& x) const {
    return potential(x) - 0.25 * omega * omega * (x.x1 * x.x1 + x.x2 * x.x2);
  }

  /// Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

/// Minimum of V_R over all quadrature points of the high-order rule.
double min_rotating_potential(const FeSpace& space, const ModelParams& params);

/// Centrifugal balance check: V_R >= 0 at every quadrature point.
bool a4_feasible(const FeSpace& space, const ModelParams& params);

enum class DofSet { interior, all };

/// M_ij = int phi_i phi_j
RealSparse assemble_mass(const FeSpace& space, DofSet dofs = DofSet::interior);

/// K_ij = int grad phi_i . grad phi_j
RealSparse assemble_stiffness(const FeSpace& space);

/// int V phi_i phi_j
RealSparse assemble_potential_mass(const FeSpace& space, const ModelParams& params);

/// Covariant form int grad_R phi_j . conj(grad_R phi_i) + V_R phi_j phi_i with
/// grad_R w = grad w + i (Omega/2) R w, R(x) = (x2, -x1). Emits a warning
/// through rbec::warn when the centrifugal balance fails.
ComplexSparse assemble_r_form(const FeSpace& space, const ModelParams& params);

/// Only the angular momentum part -Omega conj(phi_i) L3 phi_j, in the
/// symmetrised form that makes it exactly Hermitian.
ComplexSparse assemble_rotation_form(const FeSpace& space, const ModelParams& params);

/// Direct form: stiffness + V mass - Omega conj(phi_i) L3 phi_j.
ComplexSparse assemble_direct_form(const FeSpace& space, const ModelParams& params);

/// W_ij = int |u_h|^2 phi_i phi_j
RealSparse assemble_weighted_mass(const FeField& density);

/// Reassembles W(u_h) into `target`, which must carry the interior pattern of
/// the density's space.
void assemble_weighted_mass_into(const FeField& density, RealSparse& target);

/// {int Re(u)^2 phi_i phi_j, int Re(u) Im(u) phi_i phi_j, int Im(u)^2 phi_i phi_j}
std::array<RealSparse, 3> assemble_phase_masses(const FeField& u);

}  // namespace rbec
