#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rbec/errors.hpp"
#include "rbec/gpe_model.hpp"

namespace rbec {

enum class Preconditioner { jacobi, multigrid };

struct SolverConfig {
  double energy_tol = 1e-10;   ///< stop when |E(u^{n+1}) - E(u^n)| < energy_tol
  int max_iter = 20000;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double growth_factor = 1.1;
  double max_step = 1.0;
  double min_step = 1e-12;
  double inner_tol = 1e-10;    ///< relative residual of the metric solve
  int inner_max_iter = 20000;
  /// Additional stopping requirement on the Euclidean norm of the dual
  /// residual A_|u| u - lambda M u; 0 disables it.
  double residual_tol = 0.0;
  Preconditioner preconditioner = Preconditioner::multigrid;
  std::uint64_t seed = 20240501;
  /// Called after every accepted step: iteration, energy, step size.
  std::function<void(int, double, double)> progress;

  /// Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

struct GroundStateResult {
  explicit GroundStateResult(FeField state) : u(std::move(state)) {}

  FeField u;
  double lambda = 0.0;
  double energy = 0.0;
  int iterations = 0;
  std::vector<double> energy_history;  ///< E(u^0), E(u^1), ...
  double final_step = 0.0;
  double residual_norm = 0.0;          ///< Euclidean norm of A_|u| u - lambda M u
  bool a4_holds = true;
  int inner_iterations = 0;            ///< total metric-solve iterations
};

/// Solver failure carrying the history accumulated so far.
class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Normalized interpolation of (Omega / sqrt(pi)) (x1 + i x2) exp(-|x|^2 / 2),
/// or of exp(-|x|^2 / 2) when Omega = 0.
FeField initial_guess(const SpacePtr& space, const ModelParams& params, const RealSparse& mass);

/// Energy-decreasing Riemannian gradient method on the discrete L2 sphere
/// with the metric <A_|u^n| ., .> and backtracking step control.
GroundStateResult solve_ground_state(const GpeOperators& ops, const SolverConfig& config,
                                     const FeField& start);

/// Field dump of the state (see write_field).
void write_result(std::ostream& out, const GroundStateResult& result);
/// `lambda energy iterations residual a4` with a4 = 1 when V_R >= 0 held.
std::string summary_line(const GroundStateResult& result);

}  // namespace rbec
