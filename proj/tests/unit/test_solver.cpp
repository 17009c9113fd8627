#include <doctest.h>

#include <numbers>
#include <random>

#include "rbec/riemannian_solver.hpp"
#include "support.hpp"

using namespace rbec;

namespace {

ModelParams params(double beta, double omega, double gx, double gy, double r) {
  ModelParams p;
  p.beta = beta;
  p.omega = omega;
  p.gamma_x = gx;
  p.gamma_y = gy;
  p.half_width = r;
  return p;
}

bool nonincreasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

double residual_norm(const ComplexVector& r) { return norm2<Complex>(r); }

}  // namespace

TEST_CASE("solver configuration validation lists every violation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.energy_tol = 0.0;
  c.backtrack_factor = 1.0;
  c.growth_factor = 2.5;
  try {
    c.validate();
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("energy_tol") != std::string::npos);
    CHECK(msg.find("backtrack_factor") != std::string::npos);
    CHECK(msg.find("growth_factor") != std::string::npos);
  }
}

TEST_CASE("starting value: unit mass, nodal phase of x1 + i x2, rotation lowers its energy") {
  auto space = make_space(4.0, 8, 1);  // nodes on the integer lattice
  const ModelParams p = params(100.0, 1.2, 0.9, 1.2, 4.0);
  const GpeOperators ops(space, p);
  const FeField u0 = initial_guess(space, p, ops.mass());
  CHECK(std::abs(mass_norm(ops.mass(), u0) - 1.0) <= 1e-14);
  auto at = [&](double x1, double x2) {
    for (int g = 0; g < space->num_dofs(); ++g)
      if (space->dof_coord(g).x1 == x1 && space->dof_coord(g).x2 == x2) return u0.global_value(g);
    FAIL("node not found");
    return Complex();
  };
  CHECK(std::arg(at(1.0, 0.0)) == doctest::Approx(0.0));
  CHECK(std::arg(at(0.0, 1.0)) == doctest::Approx(std::numbers::pi / 2));
  const ComplexSparse rot = assemble_rotation_form(*space, p);
  CHECK(dot<Complex>(u0.vector(), rot * u0.vector()).real() < 0.0);

  const ModelParams still = params(0.0, 0.0, 1.0, 1.0, 4.0);
  const GpeOperators ops0(space, still);
  const FeField g = initial_guess(space, still, ops0.mass());
  CHECK(std::abs(mass_norm(ops0.mass(), g) - 1.0) <= 1e-14);
  for (const Complex& c : g.coefficients()) {
    CHECK(c.real() > 0.0);
    CHECK(c.imag() == 0.0);
  }
}

TEST_CASE("harmonic oscillator: lambda close to sqrt(2), monotone history, iterates on the sphere") {
  auto space = make_space(8.0, 128, 1);
  const ModelParams p = params(0.0, 0.0, 1.0, 1.0, 8.0);
  const GpeOperators ops(space, p);
  SolverConfig cfg;
  const FeField start = initial_guess(space, p, ops.mass());
  const GroundStateResult res = solve_ground_state(ops, cfg, start);
  CHECK(std::abs(res.lambda - std::numbers::sqrt2) <= 5e-3);
  CHECK(res.energy == doctest::Approx(0.5 * res.lambda).epsilon(1e-9));
  CHECK(nonincreasing(res.energy_history));
  CHECK(res.energy_history.size() == static_cast<std::size_t>(res.iterations) + 1);
  CHECK(std::abs(mass_norm(ops.mass(), res.u) - 1.0) <= 1e-12);
  CHECK(std::isfinite(res.residual_norm));
  CHECK(res.a4_holds);
}

TEST_CASE("rotating interacting condensate: monotone energy, iu in the kernel of E''(u) - lambda M") {
  auto space = make_space(5.0, 16, 1);
  const ModelParams p = params(50.0, 0.8, 1.0, 1.1, 5.0);
  const GpeOperators ops(space, p);
  SolverConfig cfg;
  cfg.energy_tol = 1e-13;
  cfg.residual_tol = 1e-10;
  std::vector<double> norms;
  cfg.progress = [&](int, double, double) {};
  const GroundStateResult res = solve_ground_state(ops, cfg, initial_guess(space, p, ops.mass()));
  CHECK(nonincreasing(res.energy_history));
  CHECK(res.residual_norm <= 1e-10);
  CHECK(std::abs(mass_norm(ops.mass(), res.u) - 1.0) <= 1e-12);

  // E''(u)(iu) = lambda M (iu) up to the eigen-residual
  const FeField iu = res.u.scaled(Complex(0.0, 1.0));
  ComplexVector r = apply_second_derivative(ops, res.u, iu);
  const ComplexVector miu = apply_real(ops.mass(), iu.coefficients());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= res.lambda * miu[i];
  CHECK(residual_norm(r) <= 1e-8);

  // lambda = 2E + beta/2 int |u|^4 at the solution as well
  CHECK(std::abs(res.lambda - 2.0 * res.energy - 0.5 * p.beta * quartic_integral(res.u)) <= 1e-12 * res.lambda);
}

TEST_CASE("solver is phase equivariant in density") {
  auto space = make_space(5.0, 16, 1);
  const ModelParams p = params(50.0, 0.8, 1.0, 1.1, 5.0);
  const GpeOperators ops(space, p);
  SolverConfig cfg;
  cfg.energy_tol = 1e-13;
  cfg.residual_tol = 1e-9;
  const FeField start = initial_guess(space, p, ops.mass());
  const GroundStateResult a = solve_ground_state(ops, cfg, start);
  const GroundStateResult b = solve_ground_state(ops, cfg, start.scaled(std::polar(1.0, 1.3)));
  CHECK(std::abs(a.energy - b.energy) <= 1e-11);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    diff = std::max(diff, std::abs(std::norm(a.u.vector()[i]) - std::norm(b.u.vector()[i])));
    ref = std::max(ref, std::norm(a.u.vector()[i]));
  }
  CHECK(diff <= 1e-6 * ref);
}

TEST_CASE("final residual shrinks as the energy tolerance tightens") {
  auto space = make_space(5.0, 16, 1);
  const ModelParams p = params(50.0, 0.8, 1.0, 1.1, 5.0);
  const GpeOperators ops(space, p);
  std::vector<double> residuals;
  for (double tol : {1e-5, 1e-8, 1e-11}) {
    SolverConfig cfg;
    cfg.energy_tol = tol;
    residuals.push_back(solve_ground_state(ops, cfg, initial_guess(space, p, ops.mass())).residual_norm);
  }
  CHECK(residuals[1] < residuals[0]);
  CHECK(residuals[2] < residuals[1]);
}

TEST_CASE("eigenvalue error identity holds for a nested coarse state") {
  const ModelParams p = params(50.0, 0.8, 1.0, 1.1, 5.0);
  auto coarse = make_space(5.0, 8, 1);
  auto fine = make_space(5.0, 16, 1);
  const GpeOperators cops(coarse, p), fops(fine, p);
  SolverConfig cfg;
  cfg.energy_tol = 1e-13;
  cfg.residual_tol = 1e-10;
  const GroundStateResult uh = solve_ground_state(cops, cfg, initial_guess(coarse, p, cops.mass()));
  const GroundStateResult u = solve_ground_state(fops, cfg, prolongate(uh.u, fine));
  const FeField uh_fine = prolongate(uh.u, fine);
  const PhaseAlignment al = phase_align(uh_fine, u.u, fops.mass());
  const IdentityTerms t = eigenvalue_identity(fops, uh.lambda, uh_fine, u.lambda, al.aligned);
  const double bound = 10.0 * (cfg.energy_tol + cfg.residual_tol);
  CHECK(t.residual() <= bound);
  CHECK(std::abs(t.lhs) > 1e-3);  // the identity is not trivially satisfied
}

TEST_CASE("max_iter and step underflow raise solver errors carrying the history") {
  auto space = make_space(5.0, 16, 1);
  const ModelParams p = params(50.0, 0.8, 1.0, 1.1, 5.0);
  const GpeOperators ops(space, p);
  SolverConfig cfg;
  cfg.max_iter = 3;
  try {
    (void)solve_ground_state(ops, cfg, initial_guess(space, p, ops.mass()));
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.history().size() >= 3);
    CHECK(nonincreasing(e.history()));
  }
  SolverConfig bad;
  bad.growth_factor = 3.0;
  CHECK_THROWS_AS(solve_ground_state(ops, bad, initial_guess(space, p, ops.mass())), std::invalid_argument);
  CHECK_THROWS_AS(solve_ground_state(ops, SolverConfig{}, initial_guess(space, p, ops.mass()).scaled(2.0)),
                  std::invalid_argument);
}

TEST_CASE("Jacobi and multigrid metrics reach the same ground state") {
  auto space = make_space(5.0, 16, 1);
  const ModelParams p = params(50.0, 0.8, 1.0, 1.1, 5.0);
  const GpeOperators ops(space, p);
  SolverConfig cfg;
  cfg.energy_tol = 1e-13;
  const GroundStateResult mg = solve_ground_state(ops, cfg, initial_guess(space, p, ops.mass()));
  cfg.preconditioner = Preconditioner::jacobi;
  const GroundStateResult jac = solve_ground_state(ops, cfg, initial_guess(space, p, ops.mass()));
  CHECK(mg.energy == doctest::Approx(jac.energy).epsilon(1e-10));
  CHECK(mg.lambda == doctest::Approx(jac.lambda).epsilon(1e-6));
}

TEST_CASE("summary line lists lambda energy iterations residual a4") {
  auto space = make_space(8.0, 16, 1);
  const ModelParams p = params(0.0, 0.0, 1.0, 1.0, 8.0);
  const GpeOperators ops(space, p);
  const GroundStateResult res = solve_ground_state(ops, SolverConfig{}, initial_guess(space, p, ops.mass()));
  std::istringstream in(summary_line(res));
  double lambda = 0.0, energy = 0.0, residual = 0.0;
  int iterations = 0, a4 = -1;
  REQUIRE(static_cast<bool>(in >> lambda >> energy >> iterations >> residual >> a4));
  CHECK(lambda == res.lambda);
  CHECK(energy == res.energy);
  CHECK(iterations == res.iterations);
  CHECK(a4 == 1);
}
