#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rbec/fespace.hpp"
#include "rbec/sparse.hpp"

namespace rbec::test {

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle, weights
/// summing to one like the library rules. Exact for degree <= 2n - 2.
struct DuffyRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;
};

inline const DuffyRule& duffy_rule(int n = 64) {
  static const DuffyRule rule = [n] {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    DuffyRule r;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double s = x[i], t = x[j];
        const double a = s * (1.0 - t), b = t;  // (a, b) in the unit triangle
        r.points.push_back({1.0 - a - b, a, b});
        r.weights.push_back(2.0 * w[i] * w[j] * (1.0 - t));
      }
    return r;
  }();
  return rule;
}

/// Integral over the mesh of f(element, barycentric, physical point).
inline double integrate(const FeSpace& space,
                        const std::function<double(int, const Barycentric&, const Point2&)>& f) {
  const DuffyRule& rule = duffy_rule();
  long double total = 0.0L;
  for (int e = 0; e < space.num_elements(); ++e) {
    const auto& tri = space.mesh().triangle(e);
    long double local = 0.0L;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      Point2 p{0.0, 0.0};
      for (int c = 0; c < 3; ++c) {
        p.x1 += l[c] * space.mesh().node(tri[c]).x1;
        p.x2 += l[c] * space.mesh().node(tri[c]).x2;
      }
      local += rule.weights[q] * f(e, l, p);
    }
    total += local * space.geometry(e).area;
  }
  return static_cast<double>(total);
}

inline Eigen::MatrixXd dense(const RealSparse& a) {
  const auto v = to_dense(a);
  Eigen::MatrixXd m(a.size(), a.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) m(i, j) = v[static_cast<std::size_t>(i) * a.size() + j];
  return m;
}

inline Eigen::MatrixXcd dense(const ComplexSparse& a) {
  const auto v = to_dense(a);
  Eigen::MatrixXcd m(a.size(), a.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) m(i, j) = v[static_cast<std::size_t>(i) * a.size() + j];
  return m;
}

inline Eigen::MatrixXd dense(const TransferMatrix& p) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p.rows(), p.cols());
  for (int i = 0; i < p.rows(); ++i)
    for (int k = p.row_offsets()[i]; k < p.row_offsets()[i + 1]; ++k) m(i, p.columns()[k]) = p.values()[k];
  return m;
}

inline Eigen::VectorXcd to_eigen(std::span<const Complex> v) {
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Random complex coefficients, uniform in the unit square of C.
inline ComplexVector random_complex(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ComplexVector v(n);
  for (auto& c : v) c = Complex(d(rng), d(rng));
  return v;
}

inline FeField random_field(std::mt19937_64& rng, const SpacePtr& space) {
  return FeField(space, random_complex(rng, static_cast<std::size_t>(space->num_interior())));
}

/// Smooth field vanishing on the boundary of [-R, R]^2, with a winding phase.
inline FeField smooth_field(const SpacePtr& space, double shift = 0.3) {
  const double r = space->mesh().half_width();
  return interpolate(space, [r, shift](const Point2& x) {
    const double bump = (r * r - x.x1 * x.x1) * (r * r - x.x2 * x.x2) / (r * r * r * r);
    return bump * std::exp(-0.5 * (x.x1 * x.x1 + x.x2 * x.x2)) * Complex(1.0 + x.x1, x.x2 - shift);
  });
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace rbec::test
