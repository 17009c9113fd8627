#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace rbec {

using Complex = std::complex<double>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

inline double conj_if(double v) { return v; }
inline Complex conj_if(const Complex& v) { return std::conj(v); }

inline double real_part(double v) { return v; }
inline double real_part(const Complex& v) { return v.real(); }

/// sum_i conj(x_i) y_i, accumulated in extended precision.
template <class T>
T dot(std::span<const T> x, std::span<const T> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  if constexpr (std::is_same_v<T, double>) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
    return static_cast<double>(s);
  } else {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const long double xr = x[i].real(), xi = x[i].imag();
      const long double yr = y[i].real(), yi = y[i].imag();
      re += xr * yr + xi * yi;
      im += xr * yi - xi * yr;
    }
    return T(static_cast<double>(re), static_cast<double>(im));
  }
}

template <class T>
T dot(const std::vector<T>& x, const std::vector<T>& y) {
  return dot(std::span<const T>(x), std::span<const T>(y));
}

template <class T>
double norm2(std::span<const T> x) {
  return std::sqrt(std::max(0.0, real_part(dot(x, x))));
}

template <class T>
double norm2(const std::vector<T>& x) {
  return norm2(std::span<const T>(x));
}

/// y += a * x
template <class T>
void axpy(T a, std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

template <class T>
void scale(T a, std::span<T> x) {
  for (auto& v : x) v *= a;
}

inline RealVector real_parts(std::span<const Complex> x) {
  RealVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
  return out;
}

}  // namespace rbec
