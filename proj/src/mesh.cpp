#include "rbec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rbec {

double MeshGrid::lattice_coordinate(double half_width, int i, int parts) {
  // (2R * i) / parts: doubling both i and parts scales numerator and
  // denominator by two, which is exact, so nested lattices share coordinates.
  return -half_width + (2.0 * half_width * i) / parts;
}

MeshGrid::MeshGrid(double half_width, int subdivisions)
    : half_width_(half_width), subdivisions_(subdivisions) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("mesh half_width must be positive and finite, got " +
                                std::to_string(half_width));
  }
  if (subdivisions < 2) {
    throw std::invalid_argument("mesh subdivisions must be >= 2 (no interior node otherwise), got " +
                                std::to_string(subdivisions));
  }
  mesh_size_ = 2.0 * half_width / subdivisions;

  const int n = subdivisions;
  nodes_.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  boundary_.reserve(nodes_.capacity());
  for (int j = 0; j <= n; ++j) {
    const double x2 = lattice_coordinate(half_width, j, n);
    for (int i = 0; i <= n; ++i) {
      nodes_.push_back({lattice_coordinate(half_width, i, n), x2});
      boundary_.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }

  triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = node_index(i, j);
      const int v10 = node_index(i + 1, j);
      const int v01 = node_index(i, j + 1);
      const int v11 = node_index(i + 1, j + 1);
      triangles_.push_back({v00, v10, v11});
      triangles_.push_back({v00, v11, v01});
    }
  }
}

double MeshGrid::signed_area(int tri) const {
  const auto& t = triangles_[tri];
  const Point2& a = nodes_[t[0]];
  const Point2& b = nodes_[t[1]];
  const Point2& c = nodes_[t[2]];
  return 0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2));
}

std::optional<MeshLocation> MeshGrid::locate(const Point2& p) const {
  const double r = half_width_;
  if (!(p.x1 >= -r && p.x1 <= r && p.x2 >= -r && p.x2 <= r)) return std::nullopt;

  const int n = subdivisions_;
  const int i = std::clamp(static_cast<int>(std::floor((p.x1 + r) / mesh_size_)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.x2 + r) / mesh_size_)), 0, n - 1);
  const Point2& origin = nodes_[node_index(i, j)];
  const double s = (p.x1 - origin.x1) / mesh_size_;
  const double t = (p.x2 - origin.x2) / mesh_size_;

  MeshLocation loc;
  const int cell = j * n + i;
  if (t <= s) {
    // (v00, v10, v11): p = v00 + s e1 + t e2
    loc.triangle = 2 * cell;
    loc.bary = {1.0 - s, s - t, t};
  } else {
    // (v00, v11, v01)
    loc.triangle = 2 * cell + 1;
    loc.bary = {1.0 - t, s, t - s};
  }
  return loc;
}

MeshGrid build_uniform_mesh(double half_width, int subdivisions) {
  return MeshGrid(half_width, subdivisions);
}

MeshGrid refine(const MeshGrid& mesh) {
  return MeshGrid(mesh.half_width(), 2 * mesh.subdivisions());
}

void write_mesh(std::ostream& out, const MeshGrid& mesh) {
  const auto old_precision = out.precision(17);
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    const auto& p = mesh.node(v);
    out << p.x1 << ' ' << p.x2 << ' ' << (mesh.on_boundary(v) ? 1 : 0) << '\n';
  }
  for (const auto& t : mesh.triangles()) {
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace rbec
