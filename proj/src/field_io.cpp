#include "rbec/field_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rbec/errors.hpp"

namespace rbec {

void write_field(std::ostream& out, const FeField& field) {
  const FeSpace& space = field.space();
  const auto old_precision = out.precision(17);
  out << space.order() << ' ' << space.mesh().subdivisions() << ' ' << space.mesh().half_width()
      << '\n';
  for (int g = 0; g < space.num_dofs(); ++g) {
    const Point2& p = space.dof_coord(g);
    const Complex v = field.global_value(g);
    out << p.x1 << ' ' << p.x2 << ' ' << v.real() << ' ' << v.imag() << '\n';
  }
  out.precision(old_precision);
}

FieldHeader read_field_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataMismatchError("field dump: missing header line");
  std::istringstream hs(line);
  FieldHeader h;
  if (!(hs >> h.order >> h.subdivisions >> h.half_width)) {
    throw DataMismatchError("field dump: malformed header '" + line + "', expected 'k N_h R'");
  }
  return h;
}

FeField read_field(std::istream& in, const SpacePtr& space) {
  const FieldHeader h = read_field_header(in);
  const double r = space->mesh().half_width();
  if (h.order != space->order() || h.subdivisions != space->mesh().subdivisions() ||
      std::abs(h.half_width - r) > 1e-12 * r) {
    std::ostringstream msg;
    msg << "field dump header (k=" << h.order << ", N_h=" << h.subdivisions << ", R=" << h.half_width
        << ") does not match the configured space (k=" << space->order()
        << ", N_h=" << space->mesh().subdivisions() << ", R=" << r << ")";
    throw DataMismatchError(msg.str());
  }

  ComplexVector coeffs(static_cast<std::size_t>(space->num_interior()));
  std::string line;
  int count = 0;
  const double coord_tol = 1e-9 * r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x1, x2, re, im;
    if (!(ls >> x1 >> x2 >> re >> im)) {
      throw DataMismatchError("field dump: malformed dof line " + std::to_string(count + 1));
    }
    if (count < space->num_dofs()) {
      const Point2& p = space->dof_coord(count);
      if (std::abs(p.x1 - x1) > coord_tol || std::abs(p.x2 - x2) > coord_tol) {
        throw DataMismatchError("field dump: dof " + std::to_string(count) +
                                " coordinate does not match the lattice");
      }
      const int i = space->interior_index(count);
      if (i >= 0) coeffs[i] = Complex(re, im);
    }
    ++count;
  }
  if (count != space->num_dofs()) {
    throw DataMismatchError("field dump: expected " + std::to_string(space->num_dofs()) +
                            " dof lines, got " + std::to_string(count));
  }
  return FeField(space, std::move(coeffs));
}

}  // namespace rbec
