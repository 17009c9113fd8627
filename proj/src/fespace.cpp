#include "rbec/fespace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rbec {
namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

FeSpace::FeSpace(MeshGrid mesh, int order) : mesh_(std::move(mesh)), order_(order) {
  if (order != 1 && order != 2) throw std::invalid_argument("FeSpace: order must be 1 or 2");

  const int m = lattice_intervals();
  const int side = m + 1;
  dof_coords_.reserve(static_cast<std::size_t>(side) * side);
  interior_index_.assign(static_cast<std::size_t>(side) * side, -1);
  for (int j = 0; j <= m; ++j) {
    const double x2 = MeshGrid::lattice_coordinate(mesh_.half_width(), j, m);
    for (int i = 0; i <= m; ++i) {
      const int g = static_cast<int>(dof_coords_.size());
      dof_coords_.push_back({MeshGrid::lattice_coordinate(mesh_.half_width(), i, m), x2});
      if (i > 0 && j > 0 && i < m && j < m) {
        interior_index_[g] = static_cast<int>(interior_dofs_.size());
        interior_dofs_.push_back(g);
      }
    }
  }

  const int nodes_per_side = mesh_.subdivisions() + 1;
  auto lattice_of = [&](int node) {
    return std::array<int, 2>{order_ * (node % nodes_per_side), order_ * (node / nodes_per_side)};
  };
  const int nloc = dofs_per_element();
  element_dofs_.reserve(static_cast<std::size_t>(mesh_.num_triangles()) * nloc);
  geometry_.reserve(static_cast<std::size_t>(mesh_.num_triangles()));
  for (int e = 0; e < mesh_.num_triangles(); ++e) {
    const auto& tri = mesh_.triangle(e);
    std::array<std::array<int, 2>, 3> v{lattice_of(tri[0]), lattice_of(tri[1]), lattice_of(tri[2])};
    for (int a = 0; a < 3; ++a) element_dofs_.push_back(v[a][1] * side + v[a][0]);
    if (order_ == 2) {
      for (int a = 0; a < 3; ++a) {
        const auto& p = v[a];
        const auto& q = v[(a + 1) % 3];
        element_dofs_.push_back(((p[1] + q[1]) / 2) * side + (p[0] + q[0]) / 2);
      }
    }

    const Point2& p0 = mesh_.node(tri[0]);
    const Point2& p1 = mesh_.node(tri[1]);
    const Point2& p2 = mesh_.node(tri[2]);
    const double det = (p1.x1 - p0.x1) * (p2.x2 - p0.x2) - (p2.x1 - p0.x1) * (p1.x2 - p0.x2);
    ElementGeometry geo;
    geo.area = 0.5 * det;
    geo.grad_bary[1] = {(p2.x2 - p0.x2) / det, -(p2.x1 - p0.x1) / det};
    geo.grad_bary[2] = {-(p1.x2 - p0.x2) / det, (p1.x1 - p0.x1) / det};
    geo.grad_bary[0] = {-geo.grad_bary[1].x1 - geo.grad_bary[2].x1,
                        -geo.grad_bary[1].x2 - geo.grad_bary[2].x2};
    geometry_.push_back(geo);
  }

  interior_pattern_ = build_pattern(true);
}

SparsityPattern FeSpace::full_pattern() const { return build_pattern(false); }

SparsityPattern FeSpace::build_pattern(bool interior_only) const {
  const int nloc = dofs_per_element();
  auto row_of = [&](int g) { return interior_only ? interior_index_[g] : g; };
  const int n = interior_only ? num_interior() : num_dofs();

  std::vector<std::vector<int>> rows(static_cast<std::size_t>(n));
  for (int e = 0; e < num_elements(); ++e) {
    const auto dofs = element_dofs(e);
    for (int a = 0; a < nloc; ++a) {
      const int ra = row_of(dofs[a]);
      if (ra < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        const int cb = row_of(dofs[b]);
        if (cb >= 0) rows[ra].push_back(cb);
      }
    }
  }

  SparsityPattern pat;
  pat.size = n;
  pat.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    pat.row_offsets[i + 1] = pat.row_offsets[i] + static_cast<int>(r.size());
  }
  pat.columns.reserve(static_cast<std::size_t>(pat.row_offsets.back()));
  for (const auto& r : rows) pat.columns.insert(pat.columns.end(), r.begin(), r.end());

  pat.element_slots.assign(static_cast<std::size_t>(num_elements()) * nloc * nloc, -1);
  for (int e = 0; e < num_elements(); ++e) {
    const auto dofs = element_dofs(e);
    for (int a = 0; a < nloc; ++a) {
      const int ra = row_of(dofs[a]);
      if (ra < 0) continue;
      const auto first = pat.columns.begin() + pat.row_offsets[ra];
      const auto last = pat.columns.begin() + pat.row_offsets[ra + 1];
      for (int b = 0; b < nloc; ++b) {
        const int cb = row_of(dofs[b]);
        if (cb < 0) continue;
        pat.element_slots[(static_cast<std::size_t>(e) * nloc + a) * nloc + b] =
            static_cast<int>(std::lower_bound(first, last, cb) - pat.columns.begin());
      }
    }
  }
  return pat;
}

const QuadratureRule& FeSpace::high_order_rule() const {
  return quadrature_rule(order_ == 1 ? 6 : 8);
}

void FeSpace::shape_values(int order, const Barycentric& l, std::span<double> out) {
  if (order == 1) {
    out[0] = l[0];
    out[1] = l[1];
    out[2] = l[2];
    return;
  }
  for (int a = 0; a < 3; ++a) out[a] = l[a] * (2.0 * l[a] - 1.0);
  out[3] = 4.0 * l[0] * l[1];
  out[4] = 4.0 * l[1] * l[2];
  out[5] = 4.0 * l[2] * l[0];
}

void FeSpace::shape_bary_derivatives(int order, const Barycentric& l,
                                     std::span<std::array<double, 3>> out) {
  if (order == 1) {
    out[0] = {1.0, 0.0, 0.0};
    out[1] = {0.0, 1.0, 0.0};
    out[2] = {0.0, 0.0, 1.0};
    return;
  }
  out[0] = {4.0 * l[0] - 1.0, 0.0, 0.0};
  out[1] = {0.0, 4.0 * l[1] - 1.0, 0.0};
  out[2] = {0.0, 0.0, 4.0 * l[2] - 1.0};
  out[3] = {4.0 * l[1], 4.0 * l[0], 0.0};
  out[4] = {0.0, 4.0 * l[2], 4.0 * l[1]};
  out[5] = {4.0 * l[2], 0.0, 4.0 * l[0]};
}

Tabulation FeSpace::tabulate(const QuadratureRule& rule) const {
  Tabulation tab;
  tab.num_points = static_cast<int>(rule.size());
  tab.num_local = dofs_per_element();
  tab.values.resize(static_cast<std::size_t>(tab.num_points) * tab.num_local);
  tab.dvalues.resize(tab.values.size());
  for (int q = 0; q < tab.num_points; ++q) {
    const std::size_t off = static_cast<std::size_t>(q) * tab.num_local;
    shape_values(order_, rule.points[q], std::span<double>(tab.values.data() + off, tab.num_local));
    shape_bary_derivatives(order_, rule.points[q],
                           std::span<std::array<double, 3>>(tab.dvalues.data() + off, tab.num_local));
  }
  return tab;
}

SpacePtr make_space(MeshGrid mesh, int order) {
  return std::make_shared<const FeSpace>(std::move(mesh), order);
}

SpacePtr make_space(double half_width, int subdivisions, int order) {
  return make_space(build_uniform_mesh(half_width, subdivisions), order);
}

// --- FeField -----------------------------------------------------------------

FeField::FeField(SpacePtr space)
    : space_(std::move(space)), coeffs_(space_->num_interior()), version_(next_version()) {}

FeField::FeField(SpacePtr space, ComplexVector coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)), version_(next_version()) {
  if (coeffs_.size() != static_cast<std::size_t>(space_->num_interior())) {
    throw std::invalid_argument("FeField: expected " + std::to_string(space_->num_interior()) +
                                " coefficients, got " + std::to_string(coeffs_.size()));
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (!std::isfinite(coeffs_[i].real()) || !std::isfinite(coeffs_[i].imag())) {
      throw std::domain_error("FeField: non-finite coefficient at interior dof " + std::to_string(i));
    }
  }
}

ComplexVector& FeField::mutable_coefficients() {
  version_ = next_version();
  return coeffs_;
}

Complex FeField::global_value(int global) const {
  const int i = space_->interior_index(global);
  return i < 0 ? Complex{} : coeffs_[i];
}

FeField FeField::scaled(Complex factor) const {
  ComplexVector c(coeffs_);
  for (auto& v : c) v *= factor;
  return FeField(space_, std::move(c));
}

FeField interpolate(const SpacePtr& space, const std::function<Complex(const Point2&)>& f) {
  ComplexVector c(static_cast<std::size_t>(space->num_interior()));
  const auto interior = space->interior_dofs();
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const Point2& p = space->dof_coord(interior[i]);
    const Complex v = f(p);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "interpolate: non-finite value at dof (" << p.x1 << ", " << p.x2 << ")";
      throw std::domain_error(msg.str());
    }
    c[i] = v;
  }
  return FeField(space, std::move(c));
}

void gather(const FeField& field, int element, std::span<Complex> local) {
  const auto dofs = field.space().element_dofs(element);
  for (std::size_t a = 0; a < dofs.size(); ++a) local[a] = field.global_value(dofs[a]);
}

PointValue evaluate(const FeField& field, int element, const Barycentric& point) {
  const FeSpace& space = field.space();
  const int nloc = space.dofs_per_element();
  std::array<Complex, 6> c{};
  std::array<double, 6> phi{};
  std::array<std::array<double, 3>, 6> dphi{};
  gather(field, element, std::span<Complex>(c.data(), nloc));
  FeSpace::shape_values(space.order(), point, std::span<double>(phi.data(), nloc));
  FeSpace::shape_bary_derivatives(space.order(), point,
                                  std::span<std::array<double, 3>>(dphi.data(), nloc));
  const auto& geo = space.geometry(element);

  PointValue out{Complex{}, {Complex{}, Complex{}}};
  for (int a = 0; a < nloc; ++a) {
    out.value += c[a] * phi[a];
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < 3; ++k) {
      gx += dphi[a][k] * geo.grad_bary[k].x1;
      gy += dphi[a][k] * geo.grad_bary[k].x2;
    }
    out.gradient[0] += c[a] * gx;
    out.gradient[1] += c[a] * gy;
  }
  return out;
}

}  // namespace rbec
