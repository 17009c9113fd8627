#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rbec {

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

using Triangle = std::array<int, 3>;
using Barycentric = std::array<double, 3>;

/// Location of a point inside the mesh: containing triangle plus barycentric
/// coordinates with respect to that triangle's vertex order.
struct MeshLocation {
  int triangle = -1;
  Barycentric bary{};
};

/// Uniform triangulation of the square [-R, R]^2 with N_h cells per side.
///
/// Nodes are numbered row-major (x1 fastest). Every cell is split along its
/// lower-left to upper-right diagonal, so cell (i, j) owns the two
/// counterclockwise triangles 2*(j*N_h + i) (below the diagonal) and
/// 2*(j*N_h + i) + 1 (above it). Refinement by a factor of two reproduces
/// every coarse node coordinate bit-exactly.
class MeshGrid {
 public:
  MeshGrid(double half_width, int subdivisions);

  double half_width() const { return half_width_; }
  int subdivisions() const { return subdivisions_; }
  double mesh_size() const { return mesh_size_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  std::span<const Point2> nodes() const { return nodes_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  const Point2& node(int index) const { return nodes_[index]; }
  const Triangle& triangle(int index) const { return triangles_[index]; }
  bool on_boundary(int node) const { return boundary_[node] != 0; }

  /// Row-major index of the node in column i (x1) and row j (x2).
  int node_index(int i, int j) const { return j * (subdivisions_ + 1) + i; }

  /// Coordinate of grid line `i` on a lattice with `parts` intervals per side.
  /// Shared by the mesh and the finite element dof layout so that nested
  /// lattices agree bit-exactly.
  static double lattice_coordinate(double half_width, int i, int parts);

  double signed_area(int tri) const;

  /// Finds a triangle containing `p` (points on shared edges resolve to
  /// either neighbour). Returns nullopt outside the closed square.
  std::optional<MeshLocation> locate(const Point2& p) const;

 private:
  double half_width_;
  int subdivisions_;
  double mesh_size_;
  std::vector<Point2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<unsigned char> boundary_;
};

MeshGrid build_uniform_mesh(double half_width, int subdivisions);

/// Uniform refinement N_h -> 2 N_h on the same square.
MeshGrid refine(const MeshGrid& mesh);

/// Plain-text dump: one line `x1 x2 boundary_flag` per node followed by one
/// line `i j k` per triangle.
void write_mesh(std::ostream& out, const MeshGrid& mesh);

}  // namespace rbec
