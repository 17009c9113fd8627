#include <doctest.h>

#include <random>
#include <string>
#include <utility>

#include "rbec/assembly.hpp"
#include "rbec/diagnostics.hpp"
#include "support.hpp"

using namespace rbec;

namespace {

ModelParams model(double beta, double omega, double gx, double gy, double r) {
  ModelParams p;
  p.beta = beta;
  p.omega = omega;
  p.gamma_x = gx;
  p.gamma_y = gy;
  p.half_width = r;
  return p;
}

Complex form(const ComplexSparse& a, const FeField& u, const FeField& v) {
  return dot<Complex>(u.vector(), a * v.vector());
}

// Oracle integrals of interpolants evaluated pointwise.
double oracle_mass(const FeField& u) {
  return test::integrate(u.space(), [&u](int e, const Barycentric& l, const Point2&) {
    return std::norm(evaluate(u, e, l).value);
  });
}

double oracle_r_form(const FeField& u, const ModelParams& p) {
  return test::integrate(u.space(), [&](int e, const Barycentric& l, const Point2& x) {
    const PointValue pv = evaluate(u, e, l);
    const Complex half_i(0.0, 0.5 * p.omega);
    const Complex g1 = pv.gradient[0] + half_i * x.x2 * pv.value;
    const Complex g2 = pv.gradient[1] - half_i * x.x1 * pv.value;
    return std::norm(g1) + std::norm(g2) + p.rotating_potential(x) * std::norm(pv.value);
  });
}

double oracle_direct_form(const FeField& u, const ModelParams& p) {
  return test::integrate(u.space(), [&](int e, const Barycentric& l, const Point2& x) {
    const PointValue pv = evaluate(u, e, l);
    // -Omega conj(u) L3 u with L3 = -i (x1 d2 - x2 d1)
    const Complex l3 = Complex(0.0, -1.0) * (x.x1 * pv.gradient[1] - x.x2 * pv.gradient[0]);
    const double rot = (-p.omega * std::conj(pv.value) * l3).real();
    return std::norm(pv.gradient[0]) + std::norm(pv.gradient[1]) + p.potential(x) * std::norm(pv.value) + rot;
  });
}

}  // namespace

TEST_CASE("mass matrix integrates one to the domain area and matches the oracle") {
  std::mt19937_64 rng(21);
  for (int k : {1, 2}) {
    auto space = make_space(1.5, 6, k);
    const RealSparse full = assemble_mass(*space, DofSet::all);
    std::vector<double> ones(full.size(), 1.0);
    CHECK(dot<double>(ones, full * ones) == doctest::Approx(9.0).epsilon(1e-13));
    const RealSparse m = assemble_mass(*space);
    CHECK(m.is_hermitian(0.0));
    const FeField u = test::random_field(rng, space);
    CHECK(dot<Complex>(u.vector(), apply_real(m, u.coefficients())).real() ==
          doctest::Approx(oracle_mass(u)).epsilon(1e-12));
  }
}

TEST_CASE("stiffness matrix matches the oracle and annihilates constants on all dofs") {
  std::mt19937_64 rng(22);
  for (int k : {1, 2}) {
    auto space = make_space(2.0, 5, k);
    const RealSparse a = assemble_stiffness(*space);
    CHECK(a.is_hermitian(1e-14));
    const FeField u = test::random_field(rng, space);
    const double oracle = test::integrate(*space, [&u](int e, const Barycentric& l, const Point2&) {
      const PointValue pv = evaluate(u, e, l);
      return std::norm(pv.gradient[0]) + std::norm(pv.gradient[1]);
    });
    CHECK(dot<Complex>(u.vector(), apply_real(a, u.coefficients())).real() ==
          doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("covariant form matches the pointwise oracle and is Hermitian") {
  std::mt19937_64 rng(23);
  const ModelParams p = model(0.0, 1.2, 0.9, 1.2, 3.0);
  for (int k : {1, 2}) {
    auto space = make_space(3.0, 6, k);
    const ComplexSparse a = assemble_r_form(*space, p);
    CHECK(a.is_hermitian(1e-13));
    const FeField u = test::random_field(rng, space);
    const Complex q = form(a, u, u);
    CHECK(std::abs(q.imag()) < 1e-12 * std::abs(q));
    CHECK(q.real() == doctest::Approx(oracle_r_form(u, p)).epsilon(1e-12));
  }
}

TEST_CASE("direct form and covariant form define the same quadratic form") {
  std::mt19937_64 rng(24);
  const WarningHandler old = set_warning_handler([](const std::string&) {});
  for (const ModelParams& p : {model(0.0, 1.2, 0.9, 1.2, 6.0), model(0.0, 0.3, 1.0, 1.0, 4.0),
                               model(0.0, 2.5, 1.0, 1.0, 2.0)}) {
    for (int k : {1, 2}) {
      auto space = make_space(p.half_width, 8, k);
      const ComplexSparse direct = assemble_direct_form(*space, p);
      const ComplexSparse covariant = assemble_r_form(*space, p);
      CHECK(direct.is_hermitian(1e-13));
      for (int trial = 0; trial < 5; ++trial) {
        const FeField u = test::random_field(rng, space);
        const Complex a = form(direct, u, u), b = form(covariant, u, u);
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
        CHECK(a.real() == doctest::Approx(oracle_direct_form(u, p)).epsilon(1e-11));
      }
    }
  }
  set_warning_handler(old);
}

TEST_CASE("rotation form lowers the energy of the vortex ansatz") {
  const ModelParams p = model(0.0, 1.2, 1.0, 1.0, 6.0);
  auto space = make_space(6.0, 16, 1);
  const ComplexSparse rot = assemble_rotation_form(*space, p);
  CHECK(rot.is_hermitian(1e-13));
  const FeField vortex = interpolate(space, [](const Point2& x) {
    return Complex(x.x1, x.x2) * std::exp(-0.5 * (x.x1 * x.x1 + x.x2 * x.x2));
  });
  CHECK(form(rot, vortex, vortex).real() < 0.0);
  const FeField anti = interpolate(space, [](const Point2& x) {
    return Complex(x.x1, -x.x2) * std::exp(-0.5 * (x.x1 * x.x1 + x.x2 * x.x2));
  });
  CHECK(form(rot, anti, anti).real() > 0.0);
}

TEST_CASE("weighted and phase masses match the oracle") {
  std::mt19937_64 rng(25);
  for (int k : {1, 2}) {
    auto space = make_space(2.0, 5, k);
    const FeField w = test::random_field(rng, space);
    const FeField u = test::random_field(rng, space);
    const RealSparse wm = assemble_weighted_mass(w);
    const double oracle = test::integrate(*space, [&](int e, const Barycentric& l, const Point2&) {
      return std::norm(evaluate(w, e, l).value) * std::norm(evaluate(u, e, l).value);
    });
    CHECK(dot<Complex>(u.vector(), apply_real(wm, u.coefficients())).real() == doctest::Approx(oracle).epsilon(1e-12));

    RealSparse target = assemble_mass(*space);
    assemble_weighted_mass_into(w, target);
    const std::span<const double> a = std::as_const(target).values(), b = wm.values();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));

    const auto phase = assemble_phase_masses(w);
    const auto rr = phase[0].values(), ii = phase[2].values();
    for (std::size_t i = 0; i < rr.size(); ++i) CHECK(rr[i] + ii[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("centrifugal balance violation warns with the minimum and Omega") {
  std::vector<std::string> messages;
  const WarningHandler old = set_warning_handler([&messages](const std::string& m) { messages.push_back(m); });
  auto space = make_space(2.0, 8, 1);
  const ModelParams ok = model(0.0, 0.9, 1.0, 1.0, 2.0);
  (void)assemble_r_form(*space, ok);
  CHECK(messages.empty());
  CHECK(a4_feasible(*space, ok));
  const ModelParams bad = model(0.0, 1.5, 1.0, 1.0, 2.0);
  (void)assemble_r_form(*space, bad);
  set_warning_handler(old);
  REQUIRE(messages.size() == 1);
  CHECK(messages[0].find("1.5") != std::string::npos);
  CHECK_FALSE(a4_feasible(*space, bad));
  CHECK(min_rotating_potential(*space, bad) < 0.0);
}

TEST_CASE("model parameter validation lists every violation") {
  ModelParams p = model(-1.0, std::nan(""), 1.0, 1.0, -2.0);
  try {
    p.validate();
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("beta") != std::string::npos);
    CHECK(msg.find("omega") != std::string::npos);
    CHECK(msg.find("half_width") != std::string::npos);
  }
}
