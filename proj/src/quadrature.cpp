#include "rbec/quadrature.hpp"

#include <stdexcept>
#include <string>

namespace rbec {
namespace {

// Orbit generators for fully symmetric rules (Dunavant 1985 tables).
void add_centroid(QuadratureRule& rule, double w) {
  rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  rule.weights.push_back(w);
}

void add_orbit3(QuadratureRule& rule, double w, double a) {
  const double b = 0.5 * (1.0 - a);
  rule.points.push_back({a, b, b});
  rule.points.push_back({b, a, b});
  rule.points.push_back({b, b, a});
  rule.weights.insert(rule.weights.end(), 3, w);
}

void add_orbit6(QuadratureRule& rule, double w, double a, double b) {
  const double c = 1.0 - a - b;
  rule.points.push_back({a, b, c});
  rule.points.push_back({a, c, b});
  rule.points.push_back({b, a, c});
  rule.points.push_back({b, c, a});
  rule.points.push_back({c, a, b});
  rule.points.push_back({c, b, a});
  rule.weights.insert(rule.weights.end(), 6, w);
}

QuadratureRule make_degree2() {
  QuadratureRule rule;
  rule.degree = 2;
  add_orbit3(rule, 1.0 / 3.0, 2.0 / 3.0);
  return rule;
}

QuadratureRule make_degree6() {
  QuadratureRule rule;
  rule.degree = 6;
  add_orbit3(rule, 0.116786275726379, 0.501426509658179);
  add_orbit3(rule, 0.050844906370207, 0.873821971016996);
  add_orbit6(rule, 0.082851075618374, 0.053145049844817, 0.310352451033784);
  return rule;
}

QuadratureRule make_degree8() {
  QuadratureRule rule;
  rule.degree = 8;
  add_centroid(rule, 0.144315607677787);
  add_orbit3(rule, 0.095091634267285, 0.081414823414554);
  add_orbit3(rule, 0.103217370534718, 0.658861384496480);
  add_orbit3(rule, 0.032458497623198, 0.898905543365938);
  add_orbit6(rule, 0.027230314174435, 0.008394777409958, 0.263112829634638);
  return rule;
}

}  // namespace

const QuadratureRule& quadrature_rule(int degree) {
  static const QuadratureRule deg2 = make_degree2();
  static const QuadratureRule deg6 = make_degree6();
  static const QuadratureRule deg8 = make_degree8();
  if (degree <= 2) return deg2;
  if (degree <= 6) return deg6;
  if (degree <= 8) return deg8;
  throw std::invalid_argument("no built-in triangle quadrature of degree " + std::to_string(degree));
}

}  // namespace rbec
