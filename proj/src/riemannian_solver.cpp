#include "rbec/riemannian_solver.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rbec/field_io.hpp"
#include "rbec/iterative.hpp"
#include "rbec/multigrid.hpp"

namespace rbec {

void SolverConfig::validate() const {
  std::vector<std::string> problems;
  if (!(energy_tol > 0.0)) problems.push_back("energy_tol must be > 0");
  if (max_iter < 1) problems.push_back("max_iter must be >= 1");
  if (!(initial_step > 0.0)) problems.push_back("initial_step must be > 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) problems.push_back("backtrack_factor must lie in (0, 1)");
  if (!(growth_factor > 1.0 && growth_factor < 2.0)) problems.push_back("growth_factor must lie in (1, 2)");
  if (!(max_step > 0.0)) problems.push_back("max_step must be > 0");
  if (!(min_step > 0.0 && min_step < initial_step)) problems.push_back("min_step must lie in (0, initial_step)");
  if (!(inner_tol > 0.0 && inner_tol < 1.0)) problems.push_back("inner_tol must lie in (0, 1)");
  if (inner_max_iter < 1) problems.push_back("inner_max_iter must be >= 1");
  if (!(residual_tol >= 0.0)) problems.push_back("residual_tol must be >= 0");
  if (!problems.empty()) {
    std::string msg = "invalid solver configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
}

FeField initial_guess(const SpacePtr& space, const ModelParams& params, const RealSparse& mass) {
  const double omega = params.omega;
  FeField u0 = omega != 0.0 ? interpolate(space,
                                          [omega](const Point2& x) {
                                            const double g = std::exp(-0.5 * (x.x1 * x.x1 + x.x2 * x.x2));
                                            return omega / std::sqrt(std::numbers::pi) * Complex(x.x1, x.x2) * g;
                                          })
                            : interpolate(space, [](const Point2& x) {
                                return Complex(std::exp(-0.5 * (x.x1 * x.x1 + x.x2 * x.x2)), 0.0);
                              });
  return normalize(u0, mass);
}

namespace {

// Metric solve A g = r with the configured preconditioner. The multigrid
// hierarchy is planned once and refreshed with the values of each new A.
class MetricSolver {
 public:
  MetricSolver(const GpeOperators& ops, const SolverConfig& config) : ops_(ops), config_(config) {}

  std::vector<Complex> solve(const ComplexSparse& a, const std::vector<Complex>& r, int& iterations) {
    std::vector<Complex> g(r.size());
    CgOptions<Complex> opts;
    opts.tol = config_.inner_tol;
    opts.max_iter = config_.inner_max_iter;
    auto apply = [&a](std::span<const Complex> x, std::span<Complex> y) { a.multiply(x, y); };
    CgReport rep;
    if (config_.preconditioner == Preconditioner::multigrid) {
      if (!mg_) {
        mg_.emplace(transfer_chain(ops_.space()), a);
      } else {
        mg_->update(a);
      }
      rep = conjugate_gradient<Complex>(apply, *mg_, std::span<const Complex>(r), std::span<Complex>(g), opts);
    } else {
      JacobiPreconditioner<Complex> jacobi(a);
      rep = conjugate_gradient<Complex>(apply, jacobi, std::span<const Complex>(r), std::span<Complex>(g), opts);
    }
    iterations += rep.iterations;
    return g;
  }

 private:
  const GpeOperators& ops_;
  const SolverConfig& config_;
  std::optional<Multigrid<Complex>> mg_;
};

}  // namespace

GroundStateResult solve_ground_state(const GpeOperators& ops, const SolverConfig& config,
                                     const FeField& start) {
  config.validate();
  require_space(ops, start, "solve_ground_state");
  const RealSparse& mass = ops.mass();
  const double start_norm = mass_norm(mass, start);
  if (!(std::abs(start_norm - 1.0) <= 1e-10)) {
    throw std::invalid_argument("solve_ground_state: starting value must have unit mass norm, got " +
                                std::to_string(start_norm));
  }

  GroundStateResult res(normalize(start, mass));
  res.a4_holds = ops.a4_holds();
  FeField& u = res.u;
  double e = energy(ops, u);
  res.energy_history.push_back(e);
  double tau = config.initial_step;
  bool energy_converged = false;
  MetricSolver metric(ops, config);

  for (int it = 0;; ++it) {
    const ComplexSparse a = ops.gpe_matrix(u);
    const std::vector<Complex> au = a * u.vector();
    const std::vector<Complex> mu_vec = apply_real(mass, u.coefficients());
    const double mnorm = dot<Complex>(u.vector(), mu_vec).real();
    const double lambda = dot<Complex>(u.vector(), au).real() / mnorm;
    std::vector<Complex> r(au);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * mu_vec[i];
    const double rnorm = norm2<Complex>(r);

    res.lambda = lambda;
    res.residual_norm = rnorm;
    res.iterations = it;
    res.final_step = tau;
    res.energy = e;
    const bool residual_ok = config.residual_tol == 0.0 || rnorm <= config.residual_tol;
    if (energy_converged && residual_ok) {
      res.energy = energy(ops, u);
      return res;
    }
    if (it >= config.max_iter) {
      std::ostringstream msg;
      msg << "solve_ground_state: no convergence in " << config.max_iter << " iterations (last energy change "
          << (res.energy_history.size() > 1 ? res.energy_history[res.energy_history.size() - 2] - e : 0.0)
          << ", residual " << rnorm << ")";
      throw SolverError(msg.str(), res.energy_history);
    }

    // Sobolev gradient in the metric <A_|u| ., .>, projected onto the tangent space.
    std::vector<Complex> d;
    try {
      d = metric.solve(a, r, res.inner_iterations);
    } catch (const NumericalError& err) {
      throw SolverError(std::string("solve_ground_state: metric solve failed: ") + err.what(), res.energy_history);
    }
    const std::vector<Complex> md = apply_real(mass, d);
    const double along = dot<Complex>(u.vector(), md).real() / mnorm;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= along * u.vector()[i];

    // Backtracking on the sphere.
    while (true) {
      ComplexVector c(u.vector());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] -= tau * d[i];
      FeField cand = normalize(FeField(u.space_ptr(), std::move(c)), mass);
      const double de = sphere_energy_difference(ops, u, cand);
      if (de <= 0.0) {
        energy_converged = std::abs(de) < config.energy_tol;
        u = std::move(cand);
        e += de;
        res.energy_history.push_back(e);
        if (config.progress) config.progress(it + 1, e, tau);
        tau = std::min(tau * config.growth_factor, config.max_step);
        break;
      }
      tau *= config.backtrack_factor;
      if (tau < config.min_step) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve_ground_state: stationary or nonsmooth point, step underflow at iteration " << it
            << " (energy " << e << ", residual " << rnorm << ")";
        throw SolverError(msg.str(), res.energy_history);
      }
    }
  }
}

std::string summary_line(const GroundStateResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << result.lambda << ' ' << result.energy << ' ' << result.iterations << ' ' << result.residual_norm << ' '
      << (result.a4_holds ? 1 : 0);
  return out.str();
}

void write_result(std::ostream& out, const GroundStateResult& result) {
  write_field(out, result.u);
}

}  // namespace rbec
