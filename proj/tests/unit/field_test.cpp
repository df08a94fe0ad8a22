#include "fbv/field.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fbv;

namespace {

double fd(const Field& f, const Point& p, int k, double h = 1e-5) {
  Point a = p, b = p;
  a[k] += h;
  b[k] -= h;
  return ((f(a) - f(b)) / (2 * h)).real();
}

}  // namespace

TEST(Field, ParseAndPrintRoundTrip) {
  const Field f = Field::parse("z1^2*zb2 + exp(x1)*sin(x3) - 2*i*bump(x2*x2) + window_3(x1)");
  const Field g = Field::parse(f.to_string());
  const Point p{0.3, -0.2, 0.5, 0.1};
  EXPECT_NEAR(std::abs(f(p) - g(p)), 0.0, 1e-14);
}

TEST(Field, ComplexDerivativesOfCoordinates) {
  const Point p{0.3, -0.2};
  EXPECT_NEAR(std::abs(Field::z(1).d_dz(1)(p) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(Field::z(1).d_dzbar(1)(p)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(Field::zbar(1).d_dzbar(1)(p) - 1.0), 0.0, 1e-15);
}

TEST(Field, BumpValuesAndSupport) {
  const Field s = Field::coordinate(0);
  EXPECT_EQ(bump(s)(Point{0.0}), cplx(1.0));
  EXPECT_EQ(bump(s)(Point{1.0}), cplx(0.0));
  EXPECT_EQ(bump(s)(Point{2.0}), cplx(0.0));
  EXPECT_NEAR(bump(s)(Point{0.5}).real(), std::exp(-1.0), 1e-15);
}

TEST(Field, BumpDerivativesMatchDifferences) {
  const Field s = Field::coordinate(0);
  const Field b = bump(s * s);
  Field d = b;
  for (int order = 1; order <= 3; ++order) {
    const Field next = d.derivative(0);
    for (double x : {-0.7, -0.2, 0.0, 0.4, 0.9}) {
      const Point p{x};
      EXPECT_NEAR(next(p).real(), fd(d, p, 0), 1e-5 * std::max(1.0, std::abs(next(p))));
    }
    d = next;
  }
  EXPECT_EQ(d(Point{1.5}), cplx(0.0));
}

TEST(Field, WindowIsPiecewisePolynomial) {
  const Field t = Field::coordinate(0);
  const Field w = window(t, 3);
  EXPECT_NEAR(w(Point{0.5}).real(), std::pow(0.75, 3), 1e-15);
  EXPECT_EQ(w(Point{1.2}), cplx(0.0));
  EXPECT_NEAR(w.derivative(0)(Point{0.5}).real(), -6 * 0.5 * 0.75 * 0.75, 1e-15);
  EXPECT_EQ(window(t, 0).derivative(0)(Point{0.3}), cplx(0.0));
  EXPECT_THROW(window(t, -1), Error);
}

TEST(Field, OpaqueFieldsRejectAnalyticDerivatives) {
  const Field f = Field::opaque([](const Point& p) { return cplx(p[0]); }, "sample");
  EXPECT_FALSE(f.differentiable());
  EXPECT_THROW(f.derivative(0), NotDifferentiable);
  EXPECT_EQ(f.opaque_label().value(), "sample");
}
