#include "fbv/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace fbv;
using namespace fbv::geometry;
using exterior::FormValue;

TEST(Domain, RejectsDegenerateParameters) {
  EXPECT_THROW(Domain::ball(2, 0.0), Error);
  EXPECT_THROW(Domain::ball(3, 1.0), Error);
  EXPECT_THROW(Domain::interval_box({0.0}, {0.0}), Error);
  EXPECT_THROW(Domain::half_space_patch({-1.0, -1.0}, {0.5, 1.0}), Error);
  EXPECT_THROW(Domain::ellipsoid({1.0, -2.0}), Error);
}

TEST(Domain, UnitDiscDefiningFunction) {
  const Domain d = Domain::ball(2);
  const Point x{0.3, -0.4};
  EXPECT_NEAR(d.r(x), -0.5, 1e-15);
  EXPECT_NEAR(d.gradient(x).norm(), 1.0, 1e-15);
  const BoundaryFrame f = boundary_frame(d, Point{1.0, 0.0});
  EXPECT_EQ(f.nu, (Point{1.0, 0.0}));
  EXPECT_THROW(boundary_frame(d, Point{0.5, 0.0}), Error);
}

TEST(Domain, IntervalNormals) {
  const Domain d = Domain::interval_box({-1.0}, {0.0});
  EXPECT_NEAR(boundary_frame(d, Point{-1.0}).nu[0], -1.0, 0.0);
  EXPECT_NEAR(boundary_frame(d, Point{0.0}).nu[0], 1.0, 0.0);
  const auto rule = quadrature(d, Region::kBoundary, 3);
  ASSERT_EQ(rule.size(), 2u);
  EXPECT_EQ(rule.normals[0][0] + rule.normals[1][0], 0.0);
}

TEST(Domain, HalfSpaceNormalIsE1) {
  const Domain d = Domain::half_space_patch({-1.0, -1.0}, {0.0, 1.0});
  const BoundaryFrame f = boundary_frame(d, Point{0.0, 0.37});
  EXPECT_EQ(f.nu, (Point{1.0, 0.0}));
  const auto rule = quadrature(d, Region::kBoundary, 2);
  for (const Point& p : rule.nodes) EXPECT_EQ(p[0], 0.0);
  EXPECT_NEAR(rule.integrate([](const Point&) { return 1.0; }), 2.0, 1e-14);
}

TEST(Domain, NormalizationOnBoundary) {
  for (const Domain& d : {Domain::ball(2, 1.5), Domain::ball(4), Domain::ellipsoid({1.0, 2.0}),
                          Domain::ellipsoid({1.0, 0.5, 2.0, 1.5})}) {
    const auto rule = quadrature(d, Region::kBoundary, 1);
    double worst = 0.0;
    for (const Point& p : rule.nodes) {
      worst = std::max(worst, std::abs(d.gradient(p).norm() - 1.0));
      EXPECT_LT(std::abs(d.r(p)), 1e-12);
    }
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(Domain, EllipsoidGradientMatchesDifferences) {
  const Domain d = Domain::ellipsoid({1.0, 0.5, 2.0, 1.5});
  const Point x{0.2, 0.1, -0.7, 0.4};
  const Point g = d.gradient(x);
  const double h = 1e-6;
  for (int k = 0; k < 4; ++k) {
    Point a = x, b = x;
    a[k] += h;
    b[k] -= h;
    EXPECT_NEAR(g[k], (d.r(a) - d.r(b)) / (2 * h), 1e-7);
  }
}

TEST(Quadrature, DiscAreaAndCircleLength) {
  const Domain d = Domain::ball(2);
  EXPECT_NEAR(quadrature(d, Region::kInterior, 2).integrate([](const Point&) { return 1.0; }), kPi, 1e-10);
  EXPECT_NEAR(quadrature(d, Region::kBoundary, 0).integrate([](const Point&) { return 1.0; }), 2 * kPi, 1e-13);
}

TEST(Quadrature, SphereAreas) {
  const Domain b4 = Domain::ball(4);
  EXPECT_NEAR(quadrature(b4, Region::kBoundary, 1).integrate([](const Point&) { return 1.0; }), 2 * kPi * kPi, 1e-8);
  EXPECT_NEAR(quadrature(b4, Region::kInterior, 1).integrate([](const Point&) { return 1.0; }), kPi * kPi / 2, 1e-8);
  const Domain b2 = Domain::ball(Point{0.5, -0.25}, 2.0);
  EXPECT_NEAR(quadrature(b2, Region::kBoundary, 0).integrate([](const Point&) { return 1.0; }), 4 * kPi, 1e-12);
}

TEST(Quadrature, SphereMomentsMatchClosedForm) {
  // On S^3, the mean of x_1^2 is 1/4 and of x_1^2 x_3^2 is 1/24.
  const auto rule = quadrature(Domain::ball(4), Region::kBoundary, 1);
  const double area = 2 * kPi * kPi;
  EXPECT_NEAR(rule.integrate([](const Point& p) { return p[0] * p[0]; }) / area, 0.25, 1e-12);
  EXPECT_NEAR(rule.integrate([](const Point& p) { return p[0] * p[0] * p[2] * p[2]; }) / area, 1.0 / 24, 1e-12);
}

TEST(Quadrature, EllipseAreaAndPerimeter) {
  const Domain d = Domain::ellipsoid({2.0, 0.5});
  EXPECT_NEAR(quadrature(d, Region::kInterior, 2).integrate([](const Point&) { return 1.0; }), kPi, 1e-10);
  // Independent perimeter: arc length of (2 cos t, 0.5 sin t) by fine Gauss panels.
  const auto g = numeric::composite_gauss(0.0, 2 * kPi, 256, 8);
  double perimeter = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i)
    perimeter += g.weights[i] * std::hypot(2.0 * std::sin(g.nodes[i]), 0.5 * std::cos(g.nodes[i]));
  EXPECT_NEAR(quadrature(d, Region::kBoundary, 3).integrate([](const Point&) { return 1.0; }), perimeter, 1e-10);
}

TEST(Quadrature, BoxVolumeAndSurface) {
  const Domain d = Domain::interval_box({-1.0, 0.0, 2.0}, {0.0, 2.0, 3.0});
  EXPECT_NEAR(quadrature(d, Region::kInterior, 1).integrate([](const Point&) { return 1.0; }), 2.0, 1e-13);
  EXPECT_NEAR(quadrature(d, Region::kBoundary, 1).integrate([](const Point&) { return 1.0; }), 2 * (2 + 1 + 2), 1e-13);
}

TEST(Quadrature, RefinementDeltasShrink) {
  const Domain d = Domain::ball(2);
  auto f = [](const Point& p) { return std::exp(p[0]) * std::cos(3 * p[1]) / (2.5 - p[0]); };
  std::vector<double> v;
  for (int level = 0; level <= 3; ++level) v.push_back(quadrature(d, Region::kInterior, level).integrate(f));
  const double d1 = std::abs(v[1] - v[0]);
  const double d2 = std::abs(v[2] - v[1]);
  const double d3 = std::abs(v[3] - v[2]);
  EXPECT_LT(d2, d1);
  EXPECT_LT(d3, d2 + 1e-15);
}

TEST(Quadrature, NestedLevels) {
  const auto coarse = quadrature(Domain::ball(2), Region::kBoundary, 1);
  const auto fine = quadrature(Domain::ball(2), Region::kBoundary, 2);
  for (const Point& p : coarse.nodes) {
    bool found = false;
    for (const Point& q : fine.nodes) found = found || distance(p, q) < 1e-14;
    EXPECT_TRUE(found);
  }
}

TEST(Quadrature, ExclusionRemovesNearNodes) {
  const Domain d = Domain::ball(2);
  const Point z{0.3, 0.1};
  const double rho = 2 * node_spacing(d, 2);
  const auto rule = quadrature(d, Region::kInterior, 2, Exclusion{z, rho});
  const auto full = quadrature(d, Region::kInterior, 2);
  EXPECT_LT(rule.size(), full.size());
  for (const Point& p : rule.nodes) EXPECT_GE(distance(p, z), rho);
  ASSERT_TRUE(rule.exclusion.has_value());
}

TEST(Quadrature, CsvExport) {
  const auto path = std::filesystem::temp_directory_path() / "fbv_rule_test.csv";
  write_csv(quadrature(Domain::interval_box({0.0}, {1.0}), Region::kInterior, 0), path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x1,weight");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4);
  std::filesystem::remove(path);
}

TEST(DistBoundary, ClosedForms) {
  const Domain b = Domain::ball(2);
  EXPECT_EQ(dist_boundary(b, Point{0.0, 0.0}), 1.0);
  EXPECT_NEAR(dist_boundary(b, Point{0.6, 0.45}), 0.25, 1e-15);
  EXPECT_NEAR(dist_boundary(b, Point{0.6, 0.45}), std::abs(b.r(Point{0.6, 0.45})), 0.0);
  const Domain box = Domain::interval_box({-1.0, -1.0, -1.0}, {0.0, 1.0, 1.0});
  EXPECT_NEAR(dist_boundary(box, Point{-0.1, 0.2, -0.3}), 0.1, 1e-15);
}

TEST(Pullback, DrPullsBackToZero) {
  const Domain d = Domain::ball(4);
  const Point x{0.5, 0.5, -0.5, 0.5};
  const BoundaryFrame f = boundary_frame(d, x);
  const FormValue dr = exterior::real_one_form(2, d.gradient(x));
  EXPECT_LT(pullback_boundary(dr, f).max_abs(), 1e-15);
}

TEST(Pullback, DbarRAndDelRPullBackToNegatives) {
  const Domain d = Domain::ball(4);
  const Point x{0.1, 0.7, -0.1, std::sqrt(1 - 0.51)};
  const BoundaryFrame f = boundary_frame(d, x);
  FormValue dbar_r(2), del_r(2);
  for (int j = 1; j <= 2; ++j) {
    // r = |z| - 1: dr/dzbar_j = z_j / (2|z|), dr/dz_j = conj(z_j) / (2|z|).
    dbar_r += (x.z(j) / 2.0) * FormValue::dzbar(2, j);
    del_r += (std::conj(x.z(j)) / 2.0) * FormValue::dz(2, j);
  }
  EXPECT_LT((pullback_boundary(dbar_r, f) + pullback_boundary(del_r, f)).max_abs(), 1e-15);
}

TEST(Pullback, CircleAngularComponent) {
  const double t = 0.8;
  const Point x{std::cos(t), std::sin(t)};
  const BoundaryFrame f = boundary_frame(Domain::ball(2), x);
  // w = a dx + b dy; its pullback along theta is -a sin t + b cos t.
  const cplx a(0.3, 1.0), b(-2.0, 0.5);
  const FormValue w = a * FormValue::dx(1, 1) + b * FormValue::dx(1, 2);
  EXPECT_NEAR(std::abs(boundary_density(w, f) - (-a * std::sin(t) + b * std::cos(t))), 0.0, 1e-15);
  const FormValue tangential = pullback_boundary(w, f);
  EXPECT_NEAR(std::abs(boundary_density(tangential, f) - boundary_density(w, f)), 0.0, 1e-15);
}
