#pragma once

#include <array>
#include <cmath>
#include <initializer_list>

#include "fbv/numeric.hpp"

namespace fbv {

inline constexpr int kMaxRealDim = 8;

/// A point of R^m, m <= kMaxRealDim. For complex domains m = 2n and
/// z_j = x_{2j-1} + i x_{2j} (coordinates stored 0-based as x[2j-2], x[2j-1]).
struct Point {
  std::array<double, kMaxRealDim> x{};
  int dim = 0;

  Point() = default;
  explicit Point(int dimension) : dim(dimension) {
    if (dimension < 0 || dimension > kMaxRealDim) throw Error("Point: dimension out of range");
  }
  Point(std::initializer_list<double> coords) : dim(static_cast<int>(coords.size())) {
    if (dim > kMaxRealDim) throw Error("Point: dimension out of range");
    int k = 0;
    for (double c : coords) x[k++] = c;
  }

  double& operator[](int k) { return x[k]; }
  double operator[](int k) const { return x[k]; }

  /// Complex coordinate z_j, j is 1-based.
  cplx z(int j) const { return {x[2 * j - 2], x[2 * j - 1]}; }

  static Point from_complex(std::initializer_list<cplx> zs) {
    Point p(2 * static_cast<int>(zs.size()));
    int k = 0;
    for (cplx w : zs) {
      p.x[k++] = w.real();
      p.x[k++] = w.imag();
    }
    return p;
  }

  double norm() const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += x[k] * x[k];
    return std::sqrt(s);
  }

  friend Point operator+(Point a, const Point& b) {
    for (int k = 0; k < a.dim; ++k) a.x[k] += b.x[k];
    return a;
  }
  friend Point operator-(Point a, const Point& b) {
    for (int k = 0; k < a.dim; ++k) a.x[k] -= b.x[k];
    return a;
  }
  friend Point operator*(double s, Point a) {
    for (int k = 0; k < a.dim; ++k) a.x[k] *= s;
    return a;
  }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int k = 0; k < a.dim; ++k) s += a.x[k] * b.x[k];
  return s;
}

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace fbv
