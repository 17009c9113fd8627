#include "rbec/gpe_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rbec/errors.hpp"

namespace rbec {
namespace {

constexpr int kMaxPoints = 16;

std::span<const Complex> coeffs(const FeField& f) { return f.coefficients(); }

// Values of `f` at the quadrature points of element e.
void values_at(const FeField& f, const Tabulation& tab, int e, std::array<Complex, kMaxPoints>& out) {
  std::array<Complex, 6> c{};
  gather(f, e, std::span<Complex>(c.data(), tab.num_local));
  for (int q = 0; q < tab.num_points; ++q) {
    Complex v{};
    for (int a = 0; a < tab.num_local; ++a) v += c[a] * tab.value(q, a);
    out[q] = v;
  }
}

double quadratic_form(const RealSparse& a, const FeField& u) {
  return real_part(dot<Complex>(coeffs(u), apply_real(a, coeffs(u))));
}

void require_same(const FeField& a, const FeField& b, const char* who) {
  if (a.space_ptr() != b.space_ptr()) {
    throw std::invalid_argument(std::string(who) + ": fields live on different spaces");
  }
}

}  // namespace

void require_space(const GpeOperators& ops, const FeField& u, const char* who) {
  if (u.space_ptr() != ops.space_ptr()) {
    throw std::invalid_argument(std::string(who) + ": field does not live on the operator space");
  }
}

GpeOperators::GpeOperators(SpacePtr space, ModelParams params)
    : space_(std::move(space)), params_(params) {
  params_.validate();
  if (std::abs(params_.half_width - space_->mesh().half_width()) > 0.0) {
    throw std::invalid_argument("GpeOperators: model half_width differs from the mesh half_width");
  }
  mass_ = assemble_mass(*space_);
  stiffness_ = assemble_stiffness(*space_);
  a4_holds_ = a4_feasible(*space_, params_);
  r_form_ = assemble_r_form(*space_, params_);
}

std::shared_ptr<const RealSparse> GpeOperators::weighted_mass(const FeField& u) const {
  require_space(*this, u, "weighted_mass");
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!cached_w_ || cached_version_ != u.version()) {
    cached_w_ = std::make_shared<const RealSparse>(assemble_weighted_mass(u));
    cached_version_ = u.version();
  }
  return cached_w_;
}

ComplexSparse GpeOperators::gpe_matrix(const FeField& u) const {
  const auto w = weighted_mass(u);
  if (!w->same_pattern(mass_)) throw std::logic_error("gpe_matrix: unexpected sparsity pattern");
  ComplexSparse a = r_form_;
  auto av = a.values();
  const auto wv = w->values();
  for (std::size_t i = 0; i < av.size(); ++i) av[i] += params_.beta * wv[i];
  return a;
}

Complex mass_inner(const RealSparse& mass, const FeField& u, const FeField& v) {
  require_same(u, v, "mass_inner");
  return dot<Complex>(coeffs(u), apply_real(mass, coeffs(v)));
}

double mass_norm(const RealSparse& mass, const FeField& u) {
  return std::sqrt(std::max(0.0, quadratic_form(mass, u)));
}

double quartic_integral(const FeField& w) {
  const FeSpace& space = w.space();
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  std::array<Complex, kMaxPoints> wq{};
  long double total = 0.0L;
  for (int e = 0; e < space.num_elements(); ++e) {
    values_at(w, tab, e, wq);
    long double local = 0.0L;
    for (int q = 0; q < tab.num_points; ++q) {
      const double d = std::norm(wq[q]);
      local += static_cast<long double>(rule.weights[q]) * d * d;
    }
    total += local * space.geometry(e).area;
  }
  return static_cast<double>(total);
}

double energy(const GpeOperators& ops, const FeField& w) {
  require_space(ops, w, "energy");
  const Complex quad = dot<Complex>(coeffs(w), ops.r_form() * coeffs(w));
  const double value = 0.5 * quad.real() + 0.25 * ops.params().beta * quartic_integral(w);
  if (std::abs(quad.imag()) > 1e-12 * std::max(std::abs(quad), 1e-300) && std::abs(quad.imag()) > 1e-14) {
    std::ostringstream msg;
    msg << "energy: quadratic form has imaginary part " << quad.imag() << " (real part " << quad.real() << ")";
    throw NumericalError(msg.str());
  }
  return value;
}

double energy_difference(const GpeOperators& ops, const FeField& u, const FeField& w) {
  require_space(ops, u, "energy_difference");
  require_space(ops, w, "energy_difference");
  ComplexVector delta(w.vector());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= u.vector()[i];
  const ComplexVector ad = ops.r_form() * std::span<const Complex>(delta);
  const double quadratic = dot<Complex>(coeffs(u), ad).real() + 0.5 * dot<Complex>(delta, ad).real();

  const double beta = ops.params().beta;
  if (beta == 0.0) return quadratic;
  const FeField d(ops.space_ptr(), std::move(delta));
  const FeSpace& space = ops.space();
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  std::array<Complex, kMaxPoints> uq{}, dq{};
  long double quartic = 0.0L;
  for (int e = 0; e < space.num_elements(); ++e) {
    values_at(u, tab, e, uq);
    values_at(d, tab, e, dq);
    long double local = 0.0L;
    for (int q = 0; q < tab.num_points; ++q) {
      // |w|^4 - |u|^4 = (|w|^2 - |u|^2)(|w|^2 + |u|^2), |w|^2 - |u|^2 = 2 Re(u conj d) + |d|^2
      const double diff = 2.0 * (uq[q] * std::conj(dq[q])).real() + std::norm(dq[q]);
      const double sum = std::norm(uq[q] + dq[q]) + std::norm(uq[q]);
      local += static_cast<long double>(rule.weights[q]) * diff * sum;
    }
    quartic += local * space.geometry(e).area;
  }
  return quadratic + 0.25 * beta * static_cast<double>(quartic);
}

double sphere_energy_difference(const GpeOperators& ops, const FeField& u, const FeField& w) {
  require_space(ops, u, "sphere_energy_difference");
  require_space(ops, w, "sphere_energy_difference");
  ComplexVector delta(w.vector());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= u.vector()[i];
  const FeField d(ops.space_ptr(), delta);
  const ComplexVector au = apply_gpe_operator(ops, u, u);
  const ComplexVector mu = apply_real(ops.mass(), coeffs(u));
  const double lambda = dot<Complex>(coeffs(u), au).real() / dot<Complex>(coeffs(u), mu).real();
  ComplexVector r(au);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * mu[i];

  // Re <r, d> + 1/2 <(A_|u| - lambda M) d, d> + beta/4 int (|w|^2 - |u|^2)^2
  const ComplexVector ad = apply_gpe_operator(ops, u, d);
  const ComplexVector md = apply_real(ops.mass(), delta);
  const double linear = dot<Complex>(r, delta).real();
  const double quadratic = 0.5 * (dot<Complex>(delta, ad).real() - lambda * dot<Complex>(delta, md).real());

  const double beta = ops.params().beta;
  if (beta == 0.0) return linear + quadratic;
  const FeSpace& space = ops.space();
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  std::array<Complex, kMaxPoints> uq{}, dq{};
  long double quartic = 0.0L;
  for (int e = 0; e < space.num_elements(); ++e) {
    values_at(u, tab, e, uq);
    values_at(d, tab, e, dq);
    long double local = 0.0L;
    for (int q = 0; q < tab.num_points; ++q) {
      const double b = 2.0 * (uq[q] * std::conj(dq[q])).real() + std::norm(dq[q]);
      local += static_cast<long double>(rule.weights[q]) * b * b;
    }
    quartic += local * space.geometry(e).area;
  }
  return linear + quadratic + 0.25 * beta * static_cast<double>(quartic);
}

ComplexVector apply_gpe_operator(const GpeOperators& ops, const FeField& u, const FeField& v) {
  require_space(ops, u, "apply_gpe_operator");
  require_space(ops, v, "apply_gpe_operator");
  ComplexVector y = ops.r_form() * coeffs(v);
  if (ops.params().beta != 0.0) {
    const ComplexVector wv = apply_real(*ops.weighted_mass(u), coeffs(v));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += ops.params().beta * wv[i];
  }
  return y;
}

double rayleigh_lambda(const GpeOperators& ops, const FeField& u) {
  const double m = quadratic_form(ops.mass(), u);
  if (!(m > 0.0)) throw std::invalid_argument("rayleigh_lambda: zero field");
  const ComplexVector au = apply_gpe_operator(ops, u, u);
  return dot<Complex>(coeffs(u), au).real() / m;
}

ComplexVector apply_second_derivative(const GpeOperators& ops, const FeField& u, const FeField& v) {
  ComplexVector y = apply_gpe_operator(ops, u, v);
  const double beta = ops.params().beta;
  if (beta == 0.0) return y;

  const FeSpace& space = ops.space();
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  std::array<Complex, kMaxPoints> uq{}, vq{};
  for (int e = 0; e < space.num_elements(); ++e) {
    values_at(u, tab, e, uq);
    values_at(v, tab, e, vq);
    const double area = space.geometry(e).area;
    const auto dofs = space.element_dofs(e);
    for (int a = 0; a < tab.num_local; ++a) {
      const int i = space.interior_index(dofs[a]);
      if (i < 0) continue;
      Complex acc{};
      for (int q = 0; q < tab.num_points; ++q) {
        const double coupling = 2.0 * beta * (uq[q] * std::conj(vq[q])).real();
        acc += rule.weights[q] * coupling * tab.value(q, a) * uq[q];
      }
      y[i] += area * acc;
    }
  }
  return y;
}

ComplexVector eigen_residual(const GpeOperators& ops, const FeField& u, double lambda) {
  ComplexVector r = apply_gpe_operator(ops, u, u);
  const ComplexVector mu = apply_real(ops.mass(), coeffs(u));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * mu[i];
  return r;
}

FeField normalize(const FeField& u, const RealSparse& mass) {
  const double n = mass_norm(mass, u);
  if (!(n > 0.0)) throw std::invalid_argument("normalize: zero field");
  return u.scaled(Complex(1.0 / n, 0.0));
}

PhaseAlignment phase_align(const FeField& u_h, const FeField& u_ref, const RealSparse& mass) {
  const Complex a = mass_inner(mass, u_ref, u_h);
  if (std::abs(a) < 1e-12) throw NumericalError("phase_align: orthogonal states, alignment undefined");
  const double theta = std::arg(a);
  return {u_ref.scaled(std::polar(1.0, theta)), theta};
}

bool is_nested(const FeSpace& coarse, const FeSpace& fine) {
  return coarse.mesh().half_width() == fine.mesh().half_width() && coarse.order() <= fine.order() &&
         fine.mesh().subdivisions() % coarse.mesh().subdivisions() == 0;
}

TransferMatrix prolongation_matrix(const FeSpace& coarse, const FeSpace& fine) {
  if (!is_nested(coarse, fine)) {
    std::ostringstream msg;
    msg << "prolongation: P" << coarse.order() << " on N_h=" << coarse.mesh().subdivisions()
        << ", R=" << coarse.mesh().half_width() << " is not nested in P" << fine.order()
        << " on N_h=" << fine.mesh().subdivisions() << ", R=" << fine.mesh().half_width();
    throw std::invalid_argument(msg.str());
  }
  const int nc = coarse.mesh().subdivisions();
  const int m = fine.lattice_intervals();
  const int q = m / nc;  // fine lattice intervals per coarse cell
  const int side = m + 1;
  const int nloc = coarse.dofs_per_element();

  std::vector<int> offsets{0};
  std::vector<int> cols;
  std::vector<double> vals;
  std::array<double, 6> phi{};
  std::vector<std::pair<int, double>> row;
  for (int g : fine.interior_dofs()) {
    const int ii = g % side;
    const int jj = g / side;
    const int i = std::min(ii / q, nc - 1);
    const int j = std::min(jj / q, nc - 1);
    const double s = static_cast<double>(ii - i * q) / q;
    const double t = static_cast<double>(jj - j * q) / q;
    const int cell = j * nc + i;
    int element;
    Barycentric l;
    if (jj - j * q <= ii - i * q) {
      element = 2 * cell;
      l = {1.0 - s, s - t, t};
    } else {
      element = 2 * cell + 1;
      l = {1.0 - t, s, t - s};
    }
    FeSpace::shape_values(coarse.order(), l, std::span<double>(phi.data(), nloc));
    const auto dofs = coarse.element_dofs(element);
    row.clear();
    for (int a = 0; a < nloc; ++a) {
      const int c = coarse.interior_index(dofs[a]);
      if (c >= 0 && phi[a] != 0.0) row.emplace_back(c, phi[a]);
    }
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      cols.push_back(c);
      vals.push_back(v);
    }
    offsets.push_back(static_cast<int>(cols.size()));
  }
  return TransferMatrix(fine.num_interior(), coarse.num_interior(), std::move(offsets), std::move(cols),
                        std::move(vals));
}

std::vector<TransferMatrix> transfer_chain(const FeSpace& fine, int min_subdivisions) {
  std::vector<TransferMatrix> chain;
  auto current = std::make_shared<const FeSpace>(fine.mesh(), fine.order());
  if (fine.order() > 1) {
    auto p1 = std::make_shared<const FeSpace>(fine.mesh(), 1);
    chain.push_back(prolongation_matrix(*p1, *current));
    current = p1;
  }
  while (current->mesh().subdivisions() % 2 == 0 && current->mesh().subdivisions() / 2 >= min_subdivisions) {
    auto coarser = std::make_shared<const FeSpace>(
        build_uniform_mesh(current->mesh().half_width(), current->mesh().subdivisions() / 2), 1);
    chain.push_back(prolongation_matrix(*coarser, *current));
    current = coarser;
  }
  return chain;
}

FeField prolongate(const FeField& coarse, const SpacePtr& fine) {
  if (coarse.space_ptr() == fine) return coarse;
  const TransferMatrix p = prolongation_matrix(coarse.space(), *fine);
  return FeField(fine, p.apply(coarse.vector()));
}

ErrorNorms error_norms(const FeField& u_h, const FeField& u_ref, const RealSparse& fine_mass,
                       const RealSparse& fine_stiffness) {
  const FeField uh_fine = prolongate(u_h, u_ref.space_ptr());
  ComplexVector e(uh_fine.vector());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= u_ref.vector()[i];
  const FeField err(u_ref.space_ptr(), std::move(e));
  ErrorNorms out;
  const double l2sq = std::max(0.0, quadratic_form(fine_mass, err));
  const double semisq = std::max(0.0, quadratic_form(fine_stiffness, err));
  out.l2 = std::sqrt(l2sq);
  out.h1_seminorm = std::sqrt(semisq);
  out.h1 = std::sqrt(l2sq + semisq);
  return out;
}

ErrorDecomposition error_decomposition(const FeField& u_h, const FeField& u, const RealSparse& mass) {
  ErrorDecomposition d;
  d.a = mass_inner(mass, u, u_h);
  ComplexVector v(u_h.vector()), diff(u_h.vector());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] -= d.a * u.vector()[i];
    diff[i] -= u.vector()[i];
  }
  d.v_norm = mass_norm(mass, FeField(u.space_ptr(), std::move(v)));
  d.error_l2 = mass_norm(mass, FeField(u.space_ptr(), std::move(diff)));
  d.c = d.a.real() - 1.0;

  std::ostringstream msg;
  msg.precision(17);
  if (std::abs(d.a.imag()) > 1e-10) {
    msg << "error_decomposition: fields are not in the same phase, Im a = " << d.a.imag();
    throw NumericalError(msg.str());
  }
  const double expected = std::sqrt(std::max(0.0, 1.0 - d.v_norm * d.v_norm - d.a.imag() * d.a.imag()));
  if (std::abs(d.a.real() - expected) > 1e-10) {
    msg << "error_decomposition: Re a = " << d.a.real() << " but sqrt(1 - |v|^2) = " << expected;
    throw NumericalError(msg.str());
  }
  if (std::abs(d.c) > d.error_l2 * d.error_l2 + 1e-14) {
    msg << "error_decomposition: |c| = " << std::abs(d.c) << " exceeds |u_h - u|^2 = "
        << d.error_l2 * d.error_l2;
    throw NumericalError(msg.str());
  }
  return d;
}

double IdentityTerms::residual() const { return std::abs(lhs - quadratic - density); }

IdentityTerms eigenvalue_identity(const GpeOperators& ops, double lambda_h, const FeField& u_h,
                                  double lambda, const FeField& u) {
  require_space(ops, u_h, "eigenvalue_identity");
  require_space(ops, u, "eigenvalue_identity");
  ComplexVector e(u_h.vector());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= u.vector()[i];
  const FeField err(ops.space_ptr(), std::move(e));

  IdentityTerms t;
  t.lhs = lambda_h - lambda;
  const ComplexVector ae = apply_gpe_operator(ops, u, err);
  t.quadratic = dot<Complex>(coeffs(err), ae).real() - lambda * quadratic_form(ops.mass(), err);
  const double beta = ops.params().beta;
  if (beta != 0.0) {
    const double own = quadratic_form(*ops.weighted_mass(u_h), u_h);
    const double cross = quadratic_form(assemble_weighted_mass(u), u_h);
    t.density = beta * (own - cross);
  }
  return t;
}

}  // namespace rbec
