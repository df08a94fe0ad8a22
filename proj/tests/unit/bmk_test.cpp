#include "fbv/bmk.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fbv;
using namespace fbv::bmk;
using exterior::DifferentialForm;
using exterior::MultiIndex;

namespace {

Point random_point(numeric::Rng& rng, int n, double radius) {
  Point p(2 * n);
  do {
    for (int k = 0; k < 2 * n; ++k) p[k] = rng.uniform(-radius, radius);
  } while (p.norm() >= radius);
  return p;
}

cplx cauchy(cplx zeta, cplx z) { return 1.0 / (2.0 * kPi * kI * (zeta - z)); }

}  // namespace

TEST(Kernel, CauchyReduction) {
  numeric::Rng rng(1);
  const Kernel k(1, 0);
  for (int i = 0; i < 100; ++i) {
    const Point zeta = random_point(rng, 1, 2.0);
    const Point z = random_point(rng, 1, 2.0);
    const auto v = k.eval(zeta, z);
    ASSERT_EQ(v.size(), 1u);
    const cplx expected = cauchy(zeta.z(1), z.z(1));
    EXPECT_LT(std::abs(v[0][1] - expected) / std::abs(expected), 1e-12);
    EXPECT_EQ(v[0][2], cplx(0.0));
  }
}

TEST(Kernel, MinusOneIsZero) {
  const Kernel k(2, -1);
  EXPECT_TRUE(k.eval(Point{0.1, 0.0, 0.0, 0.0}, Point(4)).empty());
  EXPECT_EQ(k.norm(Point{0.1, 0.0, 0.0, 0.0}, Point(4)), 0.0);
}

TEST(Kernel, SingularAtDiagonal) {
  const Kernel k(1, 0);
  EXPECT_THROW(k.eval(Point{0.2, 0.1}, Point{0.2, 0.1}), Error);
}

TEST(Kernel, BidegreeBookkeeping) {
  numeric::Rng rng(2);
  for (int n = 1; n <= 3; ++n) {
    for (int q = 0; q < n; ++q) {
      const Kernel k(n, q);
      EXPECT_EQ(static_cast<int>(k.z_indices().size()), static_cast<int>(numeric::binomial(n, q)));
      for (const auto& J : k.z_indices()) EXPECT_EQ(J.size(), q);
      for (const auto& form : k.eval(random_point(rng, n, 1.0), random_point(rng, n, 1.0))) {
        const auto b = form.bidegree();
        ASSERT_TRUE(b.has_value());
        EXPECT_EQ(*b, (exterior::Bidegree{n, n - q - 1}));
      }
    }
  }
}

TEST(Kernel, NormScalesWithDistance) {
  numeric::Rng rng(3);
  for (int n = 1; n <= 2; ++n) {
    for (int q = 0; q < n; ++q) {
      const Kernel k(n, q);
      double lo = 1e300, hi = 0.0;
      for (int i = 0; i < 50; ++i) {
        const Point z = random_point(rng, n, 1.0);
        Point dir = random_point(rng, n, 1.0);
        dir = (1.0 / dir.norm()) * dir;
        const double t = std::pow(10.0, rng.uniform(-4.0, 0.0));
        const double a = k.norm(z + t * dir, z) * std::pow(t, 2 * n - 1);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      EXPECT_GT(lo, 0.0);
      EXPECT_LT(hi / lo, 1.0 + 1e-9) << n << " " << q;
    }
  }
}

TEST(Kernel, DensitiesMatchGenericWedge) {
  numeric::Rng rng(4);
  for (int n = 1; n <= 2; ++n) {
    for (int q = 0; q < n; ++q) {
      const Kernel k(n, q);
      const Point zeta = random_point(rng, n, 1.0);
      const Point z = random_point(rng, n, 1.0);
      exterior::FormValue g(n), f(n);
      for (const auto& K : MultiIndex::all(n, q + 1)) g += exterior::FormValue::monomial({}, K, {rng.normal(), rng.normal()});
      for (const auto& K : MultiIndex::all(n, q)) f += exterior::FormValue::monomial({}, K, {rng.normal(), rng.normal()});
      Point nu = random_point(rng, n, 1.0);
      nu = (1.0 / nu.norm()) * nu;
      const auto forms = k.eval(zeta, z);
      const auto vol = k.volume_density(g, zeta, z);
      const auto bnd = k.boundary_density(f, nu, zeta, z);
      geometry::BoundaryFrame frame{zeta, nu, nu, 1.0};
      for (size_t a = 0; a < forms.size(); ++a) {
        EXPECT_NEAR(std::abs(vol[a] - exterior::top_density(wedge(g, forms[a]))), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(bnd[a] - geometry::boundary_density(wedge(f, forms[a]), frame)), 0.0, 1e-12);
      }
    }
  }
}

TEST(OpBoundary, CauchyFormulaOnDisc) {
  const auto disc = geometry::Domain::ball(2);
  const auto rule = geometry::quadrature(disc, geometry::Region::kBoundary, 7);
  ASSERT_EQ(rule.size(), 2048u);
  numeric::Rng rng(5);
  for (int k = 0; k <= 3; ++k) {
    const auto fb = DifferentialForm::function(1, pow(Field::z(1), k));
    for (int i = 0; i < 10; ++i) {
      const Point z = random_point(rng, 1, 0.5);
      const auto v = op_boundary(fb, 0, disc, z, rule);
      EXPECT_LT(std::abs(v[0] - std::pow(z.z(1), k)), 1e-10);
    }
  }
  EXPECT_NEAR(std::abs(op_boundary(DifferentialForm::function(1, Field(1.0)), 0, disc, Point(2), rule)[0] - 1.0), 0.0,
              1e-14);
  EXPECT_LT(std::abs(op_boundary(DifferentialForm::function(1, Field::zbar(1)), 0, disc, Point(2), rule)[0]), 1e-14);
}

TEST(OpBoundary, RejectsOutsidePoints) {
  const auto disc = geometry::Domain::ball(2);
  EXPECT_THROW(op_boundary(DifferentialForm::function(1, Field(1.0)), 0, disc, Point{1.0, 0.0}, 3), Error);
  EXPECT_THROW(op_boundary(DifferentialForm::function(1, Field(1.0)), 0, disc, Point{1.5, 0.0}, 3), Error);
}

TEST(OpVolume, ZeroForm) {
  DifferentialForm g(1, {0, 1});
  const auto v = op_volume(g, 0, geometry::Domain::ball(2), Point{0.2, 0.1});
  EXPECT_EQ(v.value[0], cplx(0.0));
}

TEST(OpVolume, CauchyPompeiuSpotValue) {
  DifferentialForm g(1, {0, 1});
  g.set(MultiIndex(), MultiIndex({1}, 1), Field(1.0));
  SingularQuadratureConfig cfg;
  cfg.base_level = 2;
  cfg.refinement_steps = 4;
  const auto v = op_volume(g, 0, geometry::Domain::ball(2), Point{0.5, 0.0}, cfg);
  EXPECT_NEAR(std::abs(v.value[0] - cplx(-0.5)), 0.0, 1e-6);
  for (size_t i = 1; i < v.deltas.size(); ++i) EXPECT_LT(v.deltas[i], v.deltas[i - 1]);
}

TEST(OpVolume, PolynomialResidueOracle) {
  // dbar(zeta zetabar^2 / 2) = zeta zetabar dzetabar and its boundary values
  // zeta^{-1}/2 have Cauchy integral 0, so B^D(zeta zetabar dzetabar)(z) = -z zbar^2 / 2.
  DifferentialForm g(1, {0, 1});
  g.set(MultiIndex(), MultiIndex({1}, 1), Field::z(1) * Field::zbar(1));
  SingularQuadratureConfig cfg;
  cfg.base_level = 2;
  cfg.refinement_steps = 3;
  const Point z{0.2, -0.3};
  const auto v = op_volume(g, 0, geometry::Domain::ball(2), z, cfg);
  const cplx expected = -z.z(1) * std::conj(z.z(1)) * std::conj(z.z(1)) / 2.0;
  // The excluded ball costs O(rho^2): each level should cut the error by about 4.
  std::vector<double> err;
  for (const auto& lv : v.levels) err.push_back(std::abs(lv[0] - expected));
  for (size_t i = 1; i < err.size(); ++i) EXPECT_GT(err[i - 1] / err[i], 3.0);
  const double rho = exclusion_radius(geometry::Domain::ball(2), z, 4, cfg);
  EXPECT_LT(err.back(), 2.0 * rho * rho);
}

TEST(OpVolume, ExclusionErrorVanishesAtFirstOrderOrBetter) {
  // g = zeta dzetabar: the excluded ball removes exactly rho^2 * dg/dzeta(z).
  DifferentialForm g(1, {0, 1});
  g.set(MultiIndex(), MultiIndex({1}, 1), Field::z(1));
  SingularQuadratureConfig cfg;
  cfg.base_level = 2;
  cfg.refinement_steps = 4;
  const auto v = op_volume(g, 0, geometry::Domain::ball(2), Point{0.1, 0.2}, cfg);
  for (size_t i = 1; i < v.deltas.size(); ++i) EXPECT_GE(std::log2(v.deltas[i - 1] / v.deltas[i]), 0.9);
}

TEST(CentredRule, RespectsExclusion) {
  const auto d = geometry::Domain::ball(2);
  const Point z{0.3, 0.2};
  SingularQuadratureConfig cfg;
  for (int level : {4, 5}) {
    const auto rule = centred_rule(d, z, level, cfg);
    const double rho = exclusion_radius(d, z, level, cfg);
    for (const Point& p : rule.nodes) EXPECT_GE(distance(p, z), rho * (1 - 1e-12));
    // The cutoff is smooth but not polynomial, so the area converges spectrally.
    const double area = rule.integrate([](const Point&) { return 1.0; });
    EXPECT_NEAR(area, kPi - kPi * rho * rho, level == 4 ? 1e-6 : 1e-8);
  }
}

TEST(Config, Validation) {
  SingularQuadratureConfig cfg;
  cfg.local_fraction = 0.95;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.refinement_steps = 0;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(Reproduce, HolomorphicPolynomialsOnDisc) {
  const auto disc = geometry::Domain::ball(2);
  SingularQuadratureConfig cfg;
  cfg.refinement_steps = 1;
  for (int k = 0; k <= 3; ++k) {
    const auto f = DifferentialForm::function(1, pow(Field::z(1), k));
    const auto rep = reproduce_residual(f, f, f.dbar(), disc, {Point{0.3, 0.1}, Point{-0.2, -0.4}}, cfg);
    for (double r : rep.final_residuals) EXPECT_LT(r, 1e-8);
  }
}

TEST(Reproduce, SkipsPointsNearBoundary) {
  const auto disc = geometry::Domain::ball(2);
  const auto f = DifferentialForm::function(1, Field::z(1));
  SingularQuadratureConfig cfg;
  cfg.refinement_steps = 1;
  const auto rep = reproduce_residual(f, f, f.dbar(), disc, {Point{0.9, 0.0}, Point{0.1, 0.0}}, cfg);
  EXPECT_EQ(rep.skipped.size(), 1u);
  EXPECT_EQ(rep.final_residuals.size(), 1u);
}

TEST(Reproduce, SmoothFormInC2Improves) {
  const auto ball = geometry::Domain::ball(4);
  const auto f = DifferentialForm::function(2, Field::parse("zb1*z2 + z1^2"));
  SingularQuadratureConfig cfg;
  cfg.refinement_steps = 2;
  const auto rep = reproduce_residual(f, f, f.dbar(), ball, {Point{0.3, 0.1, -0.2, 0.25}}, cfg);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_LT(rep.rows[1].residual, rep.rows[0].residual);
  EXPECT_LT(rep.rows[1].residual, 2e-2);
}

TEST(Reproduce, SupLaddersContractForZbar) {
  const auto disc = geometry::Domain::ball(2);
  const auto f = DifferentialForm::function(1, Field::zbar(1));
  SingularQuadratureConfig cfg;
  cfg.base_level = 1;
  cfg.refinement_steps = 3;
  const std::vector<Point> pts{{0.3, 0.1}, {-0.2, -0.4}, {0.0, 0.0}};
  const auto rep = reproduce_residual(f, f, f.dbar(), disc, pts, cfg);
  const auto res = sup_residuals(rep, 3);
  const auto del = sup_deltas(rep, 3);
  ASSERT_EQ(res.size(), 3u);
  ASSERT_EQ(del.size(), 2u);
  EXPECT_LT(res[2], res[1]);
  EXPECT_LT(res[1], res[0]);
  EXPECT_LT(del[1], del[0]);
  EXPECT_THROW(sup_deltas(rep, 2), Error);
}
