#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rbec/mesh.hpp"
#include "rbec/quadrature.hpp"
#include "rbec/sparse.hpp"

namespace rbec {

/// Affine data of one triangle: area and the constant gradients of its
/// barycentric coordinates.
struct ElementGeometry {
  double area = 0.0;
  std::array<Point2, 3> grad_bary{};
};

/// Reference basis values and barycentric derivatives at quadrature points.
struct Tabulation {
  int num_points = 0;
  int num_local = 0;
  std::vector<double> values;                   ///< [q * num_local + a]
  std::vector<std::array<double, 3>> dvalues;   ///< d phi_a / d L_c, same layout

  double value(int q, int a) const { return values[q * num_local + a]; }
  const std::array<double, 3>& dvalue(int q, int a) const { return dvalues[q * num_local + a]; }
};

/// CSR pattern over a dof set plus, for every element, the CSR slot of each
/// local (row, column) pair (-1 where either dof is excluded).
struct SparsityPattern {
  int size = 0;
  std::vector<int> row_offsets;
  std::vector<int> columns;
  std::vector<int> element_slots;  ///< [e * nloc * nloc + a * nloc + b]

  template <class T>
  SparseOperator<T> make_operator(std::vector<T> values) const {
    return SparseOperator<T>(size, row_offsets, columns, std::move(values));
  }
};

/// Continuous P1 or P2 Lagrange space on a MeshGrid with homogeneous
/// Dirichlet conditions eliminated.
///
/// Dofs sit on the lattice with k*N_h intervals per side (vertices, and for
/// k = 2 also edge midpoints) and are numbered row-major on that lattice.
/// Local P2 dof order per triangle (v0, v1, v2): the three vertices, then the
/// midpoints of edges (v0,v1), (v1,v2), (v2,v0).
class FeSpace {
 public:
  FeSpace(MeshGrid mesh, int order);

  const MeshGrid& mesh() const { return mesh_; }
  int order() const { return order_; }
  int lattice_intervals() const { return order_ * mesh_.subdivisions(); }

  int num_dofs() const { return static_cast<int>(dof_coords_.size()); }
  int num_interior() const { return static_cast<int>(interior_dofs_.size()); }
  int num_elements() const { return mesh_.num_triangles(); }
  int dofs_per_element() const { return order_ == 1 ? 3 : 6; }

  std::span<const Point2> dof_coords() const { return dof_coords_; }
  const Point2& dof_coord(int global) const { return dof_coords_[global]; }
  /// Interior index of a global dof, -1 for boundary dofs.
  int interior_index(int global) const { return interior_index_[global]; }
  std::span<const int> interior_dofs() const { return interior_dofs_; }
  std::span<const int> element_dofs(int element) const {
    const int nloc = dofs_per_element();
    return {element_dofs_.data() + static_cast<std::size_t>(element) * nloc,
            static_cast<std::size_t>(nloc)};
  }
  const ElementGeometry& geometry(int element) const { return geometry_[element]; }

  /// Pattern over interior dofs, built once.
  const SparsityPattern& interior_pattern() const { return interior_pattern_; }
  /// Pattern over all dofs (boundary included), built on demand.
  SparsityPattern full_pattern() const;

  Tabulation tabulate(const QuadratureRule& rule) const;

  /// Quadrature rule used for mass-type and nonlinear terms: degree 6 for P1,
  /// degree 8 for P2 (exact for |w|^4 in both cases).
  const QuadratureRule& high_order_rule() const;

  static void shape_values(int order, const Barycentric& l, std::span<double> out);
  static void shape_bary_derivatives(int order, const Barycentric& l,
                                     std::span<std::array<double, 3>> out);

 private:
  SparsityPattern build_pattern(bool interior_only) const;

  MeshGrid mesh_;
  int order_;
  std::vector<Point2> dof_coords_;
  std::vector<int> interior_index_;
  std::vector<int> interior_dofs_;
  std::vector<int> element_dofs_;
  std::vector<ElementGeometry> geometry_;
  SparsityPattern interior_pattern_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

SpacePtr make_space(MeshGrid mesh, int order);
SpacePtr make_space(double half_width, int subdivisions, int order);

/// Discrete wavefunction: complex coefficients on the interior dofs of a
/// space (boundary values are zero).
///
/// Every construction or mutable access stamps a fresh version number;
/// copies share the version of their source, so equal versions imply equal
/// contents.
class FeField {
 public:
  explicit FeField(SpacePtr space);
  FeField(SpacePtr space, ComplexVector coefficients);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<const Complex> coefficients() const { return coeffs_; }
  const ComplexVector& vector() const { return coeffs_; }
  ComplexVector& mutable_coefficients();

  std::uint64_t version() const { return version_; }

  /// Value at a global dof (zero on the boundary).
  Complex global_value(int global) const;

  FeField scaled(Complex factor) const;

 private:
  SpacePtr space_;
  ComplexVector coeffs_;
  std::uint64_t version_;
};

struct PointValue {
  Complex value;
  std::array<Complex, 2> gradient;
};

/// Nodal interpolation. Throws std::domain_error naming the dof coordinate if
/// f is not finite there.
FeField interpolate(const SpacePtr& space, const std::function<Complex(const Point2&)>& f);

PointValue evaluate(const FeField& field, int element, const Barycentric& point);

/// Local coefficient vector of one element (boundary dofs are zero).
void gather(const FeField& field, int element, std::span<Complex> local);

}  // namespace rbec
