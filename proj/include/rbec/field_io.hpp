#pragma once

#include <iosfwd>

#include "rbec/fespace.hpp"

namespace rbec {

struct FieldHeader {
  int order = 0;
  int subdivisions = 0;
  double half_width = 0.0;
};

/// Writes the header line `k N_h R`, then one line `x1 x2 re im` per global
/// dof in lattice order (boundary dofs carry zero). Values are printed with
/// 17 significant digits so a dump reads back bit-exactly.
void write_field(std::ostream& out, const FeField& field);

FieldHeader read_field_header(std::istream& in);

/// Reads a dump for `space`. Throws DataMismatchError when the header does not
/// describe `space`, the number of dof lines is wrong, or a coordinate does
/// not match the dof lattice.
FeField read_field(std::istream& in, const SpacePtr& space);

}  // namespace rbec
