#pragma once

#include <vector>

#include "rbec/mesh.hpp"

namespace rbec {

/// Symmetric quadrature rule on the reference triangle. Weights sum to one;
/// multiply by the element area when integrating.
struct QuadratureRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Smallest built-in rule exact for polynomials of degree `degree`.
/// Available: degree 2 (3 points), 6 (12 points), 8 (16 points).
const QuadratureRule& quadrature_rule(int degree);

}  // namespace rbec
