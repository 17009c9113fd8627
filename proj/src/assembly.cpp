#include "rbec/assembly.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rbec/diagnostics.hpp"

namespace rbec {

namespace {

constexpr int kMaxLocal = 6;

template <class T>
using LocalMatrix = std::array<T, kMaxLocal * kMaxLocal>;

// Element loop: `kernel(e, local)` fills the dense local matrix (row = test
// function a, column = trial function b), which is scattered into `values`.
template <class T, class Kernel>
void assemble_values(const FeSpace& space, const SparsityPattern& pat, std::vector<T>& values,
                     Kernel&& kernel) {
  const int nloc = space.dofs_per_element();
  values.assign(pat.columns.size(), T{});
  LocalMatrix<T> local;
  for (int e = 0; e < space.num_elements(); ++e) {
    local.fill(T{});
    kernel(e, local);
    const int* slots = pat.element_slots.data() + static_cast<std::size_t>(e) * nloc * nloc;
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        const int s = slots[a * nloc + b];
        if (s >= 0) values[s] += local[a * nloc + b];
      }
  }
}

template <class T, class Kernel>
SparseOperator<T> assemble(const FeSpace& space, const SparsityPattern& pat, Kernel&& kernel) {
  std::vector<T> values;
  assemble_values<T>(space, pat, values, std::forward<Kernel>(kernel));
  return pat.make_operator<T>(std::move(values));
}

Point2 physical_point(const FeSpace& space, int e, const Barycentric& l) {
  const auto& tri = space.mesh().triangle(e);
  const Point2& p0 = space.mesh().node(tri[0]);
  const Point2& p1 = space.mesh().node(tri[1]);
  const Point2& p2 = space.mesh().node(tri[2]);
  return {l[0] * p0.x1 + l[1] * p1.x1 + l[2] * p2.x1, l[0] * p0.x2 + l[1] * p1.x2 + l[2] * p2.x2};
}

// Physical gradients of all local basis functions at quadrature point q.
void physical_gradients(const Tabulation& tab, const ElementGeometry& geo, int q,
                        std::array<Point2, kMaxLocal>& grads) {
  for (int a = 0; a < tab.num_local; ++a) {
    const auto& d = tab.dvalue(q, a);
    grads[a] = {d[0] * geo.grad_bary[0].x1 + d[1] * geo.grad_bary[1].x1 + d[2] * geo.grad_bary[2].x1,
                d[0] * geo.grad_bary[0].x2 + d[1] * geo.grad_bary[1].x2 + d[2] * geo.grad_bary[2].x2};
  }
}

// Weighted mass kernel: int weight(q) phi_a phi_b, symmetric by construction.
template <class Weight>
void weighted_mass_kernel(const Tabulation& tab, const QuadratureRule& rule, double area,
                          Weight&& weight, LocalMatrix<double>& local) {
  const int nloc = tab.num_local;
  for (int q = 0; q < tab.num_points; ++q) {
    const double wq = rule.weights[q] * area * weight(q);
    if (wq == 0.0) continue;
    for (int a = 0; a < nloc; ++a) {
      const double fa = wq * tab.value(q, a);
      for (int b = a; b < nloc; ++b) local[a * nloc + b] += fa * tab.value(q, b);
    }
  }
  for (int a = 0; a < nloc; ++a)
    for (int b = 0; b < a; ++b) local[a * nloc + b] = local[b * nloc + a];
}

// Values of a field at all quadrature points of element e.
void field_at_points(const FeField& u, const Tabulation& tab, int e, std::array<Complex, 16>& out) {
  std::array<Complex, kMaxLocal> c{};
  gather(u, e, std::span<Complex>(c.data(), tab.num_local));
  for (int q = 0; q < tab.num_points; ++q) {
    Complex v{};
    for (int a = 0; a < tab.num_local; ++a) v += c[a] * tab.value(q, a);
    out[q] = v;
  }
}

}  // namespace

void ModelParams::validate() const {
  std::vector<std::string> problems;
  if (!std::isfinite(beta) || beta < 0.0) problems.push_back("beta must be finite and >= 0");
  if (!std::isfinite(omega)) problems.push_back("omega must be finite");
  if (!std::isfinite(gamma_x)) problems.push_back("gamma_x must be finite");
  if (!std::isfinite(gamma_y)) problems.push_back("gamma_y must be finite");
  if (!std::isfinite(half_width) || half_width <= 0.0) problems.push_back("half_width must be > 0");
  if (!problems.empty()) {
    std::string msg = "invalid model parameters:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
}

double min_rotating_potential(const FeSpace& space, const ModelParams& params) {
  const QuadratureRule& rule = space.high_order_rule();
  double m = std::numeric_limits<double>::infinity();
  for (int e = 0; e < space.num_elements(); ++e)
    for (const auto& l : rule.points) m = std::min(m, params.rotating_potential(physical_point(space, e, l)));
  return m;
}

bool a4_feasible(const FeSpace& space, const ModelParams& params) {
  return min_rotating_potential(space, params) >= 0.0;
}

RealSparse assemble_mass(const FeSpace& space, DofSet dofs) {
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  auto kernel = [&](int e, LocalMatrix<double>& local) {
    weighted_mass_kernel(tab, rule, space.geometry(e).area, [](int) { return 1.0; }, local);
  };
  if (dofs == DofSet::all) return assemble<double>(space, space.full_pattern(), kernel);
  return assemble<double>(space, space.interior_pattern(), kernel);
}

RealSparse assemble_stiffness(const FeSpace& space) {
  const QuadratureRule& rule = quadrature_rule(2);
  const Tabulation tab = space.tabulate(rule);
  const int nloc = tab.num_local;
  return assemble<double>(space, space.interior_pattern(), [&](int e, LocalMatrix<double>& local) {
    const auto& geo = space.geometry(e);
    std::array<Point2, kMaxLocal> g;
    for (int q = 0; q < tab.num_points; ++q) {
      physical_gradients(tab, geo, q, g);
      const double wq = rule.weights[q] * geo.area;
      for (int a = 0; a < nloc; ++a)
        for (int b = a; b < nloc; ++b) local[a * nloc + b] += wq * (g[a].x1 * g[b].x1 + g[a].x2 * g[b].x2);
    }
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < a; ++b) local[a * nloc + b] = local[b * nloc + a];
  });
}

RealSparse assemble_potential_mass(const FeSpace& space, const ModelParams& params) {
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  return assemble<double>(space, space.interior_pattern(), [&](int e, LocalMatrix<double>& local) {
    weighted_mass_kernel(
        tab, rule, space.geometry(e).area,
        [&](int q) { return params.potential(physical_point(space, e, rule.points[q])); }, local);
  });
}

ComplexSparse assemble_r_form(const FeSpace& space, const ModelParams& params) {
  const double vr_min = min_rotating_potential(space, params);
  if (vr_min < 0.0) {
    std::ostringstream msg;
    msg << "centrifugal balance violated: V - Omega^2|x|^2/4 reaches " << vr_min
        << " < 0 (Omega=" << params.omega << ", gamma=(" << params.gamma_x << ", " << params.gamma_y
        << ")); the covariant form may be indefinite";
    warn(msg.str());
  }

  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  const int nloc = tab.num_local;
  const double half_omega = 0.5 * params.omega;
  const Complex I(0.0, 1.0);
  return assemble<Complex>(space, space.interior_pattern(), [&](int e, LocalMatrix<Complex>& local) {
    const auto& geo = space.geometry(e);
    std::array<Point2, kMaxLocal> g;
    std::array<std::array<Complex, 2>, kMaxLocal> gr;
    for (int q = 0; q < tab.num_points; ++q) {
      physical_gradients(tab, geo, q, g);
      const Point2 x = physical_point(space, e, rule.points[q]);
      const double wq = rule.weights[q] * geo.area;
      const double vr = params.rotating_potential(x);
      for (int a = 0; a < nloc; ++a) {
        const double phi = tab.value(q, a);
        gr[a][0] = g[a].x1 + I * (half_omega * x.x2 * phi);
        gr[a][1] = g[a].x2 - I * (half_omega * x.x1 * phi);
      }
      for (int a = 0; a < nloc; ++a) {
        for (int b = a; b < nloc; ++b) {
          const Complex cov = gr[b][0] * std::conj(gr[a][0]) + gr[b][1] * std::conj(gr[a][1]);
          local[a * nloc + b] += wq * (cov + vr * tab.value(q, a) * tab.value(q, b));
        }
      }
    }
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < a; ++b) local[a * nloc + b] = std::conj(local[b * nloc + a]);
  });
}

ComplexSparse assemble_rotation_form(const FeSpace& space, const ModelParams& params) {
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  const int nloc = tab.num_local;
  const Complex I(0.0, 1.0);
  return assemble<Complex>(space, space.interior_pattern(), [&](int e, LocalMatrix<Complex>& local) {
    const auto& geo = space.geometry(e);
    std::array<Point2, kMaxLocal> g;
    std::array<double, kMaxLocal> d{};
    for (int q = 0; q < tab.num_points; ++q) {
      physical_gradients(tab, geo, q, g);
      const Point2 x = physical_point(space, e, rule.points[q]);
      const double wq = rule.weights[q] * geo.area;
      // D phi = x1 d2 phi - x2 d1 phi, so L3 phi = -i D phi.
      for (int a = 0; a < nloc; ++a) d[a] = x.x1 * g[a].x2 - x.x2 * g[a].x1;
      for (int a = 0; a < nloc; ++a) {
        for (int b = a; b < nloc; ++b) {
          // -Omega/2 [phi_a L3 phi_b + conj(phi_b L3 phi_a)]
          const double antisym = tab.value(q, a) * d[b] - tab.value(q, b) * d[a];
          local[a * nloc + b] += I * (0.5 * params.omega * wq * antisym);
        }
      }
    }
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < a; ++b) local[a * nloc + b] = std::conj(local[b * nloc + a]);
  });
}

ComplexSparse assemble_direct_form(const FeSpace& space, const ModelParams& params) {
  const RealSparse k = assemble_stiffness(space);
  const RealSparse v = assemble_potential_mass(space, params);
  const ComplexSparse rot = assemble_rotation_form(space, params);
  const ComplexSparse kv = to_complex(linear_combination(1.0, k, 1.0, v));
  return linear_combination(Complex(1.0), kv, Complex(1.0), rot);
}

void assemble_weighted_mass_into(const FeField& density, RealSparse& target) {
  const FeSpace& space = density.space();
  const SparsityPattern& pat = space.interior_pattern();
  if (target.size() != pat.size || target.nnz() != pat.columns.size()) {
    throw std::invalid_argument("assemble_weighted_mass_into: target does not carry the space pattern");
  }
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  std::vector<double> values;
  std::array<Complex, 16> uq{};
  assemble_values<double>(space, pat, values, [&](int e, LocalMatrix<double>& local) {
    field_at_points(density, tab, e, uq);
    weighted_mass_kernel(tab, rule, space.geometry(e).area, [&](int q) { return std::norm(uq[q]); },
                         local);
  });
  std::copy(values.begin(), values.end(), target.values().begin());
}

RealSparse assemble_weighted_mass(const FeField& density) {
  const SparsityPattern& pat = density.space().interior_pattern();
  RealSparse w = pat.make_operator<double>(std::vector<double>(pat.columns.size()));
  assemble_weighted_mass_into(density, w);
  return w;
}

std::array<RealSparse, 3> assemble_phase_masses(const FeField& u) {
  const FeSpace& space = u.space();
  const QuadratureRule& rule = space.high_order_rule();
  const Tabulation tab = space.tabulate(rule);
  std::array<Complex, 16> uq{};
  auto build = [&](auto&& weight) {
    return assemble<double>(space, space.interior_pattern(), [&](int e, LocalMatrix<double>& local) {
      field_at_points(u, tab, e, uq);
      weighted_mass_kernel(tab, rule, space.geometry(e).area, [&](int q) { return weight(uq[q]); }, local);
    });
  };
  return {build([](Complex z) { return z.real() * z.real(); }),
          build([](Complex z) { return z.real() * z.imag(); }),
          build([](Complex z) { return z.imag() * z.imag(); })};
}

}  // namespace rbec
