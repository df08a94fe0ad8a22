#include "fbv/qops.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fbv;
using namespace fbv::qops;
using exterior::DifferentialForm;
using exterior::FormValue;
using exterior::MultiIndex;
using geometry::Domain;

namespace {

const Field x1 = Field::coordinate(0);
const Field x2 = Field::coordinate(1);

bool same_poly(const Field& a, const Field& b) {
  const auto pa = a.as_polynomial();
  const auto pb = b.as_polynomial();
  return pa && pb && *pa == *pb;
}

Field random_poly(numeric::Rng& rng, int m, int degree) {
  Field p(0.0);
  for (int k = 0; k <= degree; ++k)
    for (int l = 0; l + k <= degree; ++l) {
      Field mono = pow(Field::coordinate(0), k);
      if (m > 1) mono = mono * pow(Field::coordinate(1), l);
      else if (l > 0) continue;
      // Gaussian-integer coefficients keep the symbolic arithmetic exact.
      p = p + Field(cplx(rng.uniform_int(-3, 3), rng.uniform_int(-3, 3))) * mono;
    }
  return p;
}

DifferentialForm scalar_form(int n, const Field& f) { return DifferentialForm::function(n, f); }

DifferentialForm one_form(int n, int j, const Field& f) {
  DifferentialForm out(n, {0, 1});
  out.set(MultiIndex(), MultiIndex({j}, n), f);
  return out;
}

}  // namespace

TEST(FormalAdjoint, Examples) {
  const FirstOrderOperator d({Field(1.0)}, Field(0.0));
  const auto ad = formal_adjoint(d);
  EXPECT_TRUE(same_poly(ad.a()[0], Field(-1.0)));
  EXPECT_TRUE(ad.b().is_zero());

  const FirstOrderOperator xd({x1}, Field(0.0));
  const auto axd = formal_adjoint(xd);
  EXPECT_TRUE(same_poly(axd.a()[0], -x1));
  EXPECT_TRUE(same_poly(axd.b(), Field(-1.0)));

  const cplx b0(0.5, 2.0);
  const auto ab = formal_adjoint(FirstOrderOperator({Field(1.0)}, Field(b0)));
  EXPECT_TRUE(same_poly(ab.b(), Field(std::conj(b0))));
}

TEST(FormalAdjoint, ComplexConstantMatchesQuadratureOracle) {
  // (Qu, v) = (u, Q* v) for compactly supported u, v on [-1, 1] with Q = d/dx + b0.
  const cplx b0(0.5, 2.0);
  const FirstOrderOperator q({Field(1.0)}, Field(b0));
  const auto box = Domain::interval_box({-1.0}, {1.0});
  const Field w = interior_bump(box);
  const Field u = w * (x1 + Field(kI));
  const Field v = w * (x1 * x1 - Field(2.0));
  const cplx lhs = pairing(q.apply(u), v, box, 8);
  const cplx rhs = pairing(u, formal_adjoint(q).apply(v), box, 8);
  EXPECT_LT(std::abs(lhs - rhs), 1e-12);
  // Without the conjugate on b0 the identity fails.
  const FirstOrderOperator wrong({Field(-1.0)}, Field(b0));
  EXPECT_GT(std::abs(lhs - pairing(u, wrong.apply(v), box, 8)), 1e-2);
}

TEST(FormalAdjoint, Involution) {
  numeric::Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const FirstOrderOperator q({random_poly(rng, 2, 3), random_poly(rng, 2, 3)}, random_poly(rng, 2, 2));
    const auto qq = formal_adjoint(formal_adjoint(q));
    EXPECT_TRUE(same_poly(qq.a()[0], q.a()[0]));
    EXPECT_TRUE(same_poly(qq.a()[1], q.a()[1]));
    EXPECT_TRUE(same_poly(qq.b(), q.b()));
  }
}

TEST(PrincipalSymbol, NormalizationAndLinearity) {
  const FirstOrderOperator q({Field(1.0), Field(0.0)}, Field(3.0));
  const auto sigma = principal_symbol(q);
  const Point x{0.25, 0.375};
  EXPECT_EQ(sigma(x, Point{1.0, 0.0}), kI);
  EXPECT_EQ(sigma(x, Point{0.0, 0.0}), cplx(0.0));
  numeric::Rng rng(4);
  const FirstOrderOperator r({random_poly(rng, 2, 2), random_poly(rng, 2, 2)}, Field(0.0));
  const auto s = principal_symbol(r);
  // Dyadic data: both sides are computed without rounding.
  const Point xi{0.75, -1.125}, eta{0.25, 0.5};
  const double al = 2.0, be = -0.5;
  EXPECT_EQ(s(x, al * xi + be * eta), al * s(x, xi) + be * s(x, eta));
}

TEST(PrincipalSymbol, DbarWiringIsDbarRWedge) {
  const Point p = Point::from_complex({cplx(0.6, 0.0), cplx(0.0, 0.8)});
  FormValue dbar_r(2);
  for (int j = 1; j <= 2; ++j) dbar_r += (p.z(j) / 2.0) * FormValue::dzbar(2, j);
  const FormValue u = cplx(1.0, 2.0) * FormValue::dzbar(2, 1) + cplx(-0.5) * FormValue::dzbar(2, 2);
  EXPECT_LT(((1.0 / kI) * dbar_symbol(p, u) - wedge(dbar_r, u)).max_abs(), 1e-15);
}

TEST(GreenStokes, CompactSupportHasNoBoundaryTerm) {
  const auto box = Domain::interval_box({-1.0, -1.0}, {1.0, 1.0});
  const Field b = interior_bump(box);
  const FirstOrderOperator q({x2 + Field(kI), x1 * x1}, Field(cplx(0.3, -0.2)));
  const double r = green_stokes_residual(q, b * (x1 + x2), b * (Field(1.0) - x1 * x2), box, 6);
  EXPECT_LT(r, 1e-12);
}

TEST(GreenStokes, IntervalByHand) {
  const auto interval = Domain::interval_box({-1.0}, {0.0});
  const FirstOrderOperator q({Field(1.0)}, Field(0.0));
  EXPECT_NEAR(std::abs(pairing(q.apply(x1), Field(1.0), interval, 0)), 1.0, 1e-15);
  EXPECT_LT(green_stokes_residual(q, x1, Field(1.0), interval, 0), 1e-15);
}

TEST(GreenStokes, RandomPolynomialsConvergeOnBox) {
  numeric::Rng rng(5);
  const auto box = Domain::interval_box({-1.0, 0.0}, {0.5, 2.0});
  const FirstOrderOperator q({random_poly(rng, 2, 3), random_poly(rng, 2, 3)}, random_poly(rng, 2, 2));
  const Field u = random_poly(rng, 2, 6) * exp(x1 * x2);
  const Field v = random_poly(rng, 2, 6);
  const double scale = std::abs(pairing(q.apply(u), v, box, 3));
  std::vector<double> r;
  for (int level = 0; level <= 5; ++level) r.push_back(green_stokes_residual(q, u, v, box, level) / scale);
  for (int level = 1; level <= 4; ++level) EXPECT_LT(r[level], r[level - 1]);
  EXPECT_LT(r[5], 1e-11);
}

TEST(GreenStokes, CompactSupportDualityOnRandomPairs) {
  numeric::Rng rng(6);
  const auto box = Domain::interval_box({-1.0, -1.0}, {1.0, 1.0});
  const Field b = interior_bump(box);
  const FirstOrderOperator q({random_poly(rng, 2, 2), random_poly(rng, 2, 2)}, random_poly(rng, 2, 1));
  const auto adj = formal_adjoint(q);
  for (int t = 0; t < 50; ++t) {
    const Field u = b * random_poly(rng, 2, 3);
    const Field v = b * random_poly(rng, 2, 3);
    EXPECT_LT(std::abs(pairing(q.apply(u), v, box, 5) - pairing(u, adj.apply(v), box, 5)), 1e-8);
  }
}

TEST(TestFamily, SizeNormalizationAndBoundaryAdaptation) {
  const auto disc = Domain::ball(2);
  const auto fam = test_family(disc, {30, 4, 1});
  EXPECT_EQ(fam.size(), 30u);
  EXPECT_EQ(fam[0](Point{0.3, 0.2}), cplx(1.0));
  const auto patch = Domain::half_space_patch({-1.0, -1.0}, {0.0, 1.0});
  const auto pf = test_family(patch, {5, 4, 1});
  EXPECT_NEAR(std::abs(pf[0](Point{0.0, 0.0})), 1.0, 1e-15);
  EXPECT_LT(std::abs(pf[0](Point{-1.0, 0.2})), 1e-15);
  EXPECT_LT(std::abs(pf[0](Point{-0.3, 1.0})), 1e-15);
  EXPECT_THROW(test_family(disc, {0, 4, 1}), Error);
}

TEST(WeakBV, SmoothFunctionWithItsRestriction) {
  const auto disc = Domain::ball(2);
  const FirstOrderOperator q({x2, Field(kI)}, Field(0.5));
  const Field u = exp(x1) * (x2 + Field(2.0));
  const auto fam = test_family(disc);
  double prev = 1e300;
  for (int level = 0; level <= 4; ++level) {
    const auto rep = weak_bv_residual(q, {u, q.apply(u), u}, fam, disc, level);
    EXPECT_LT(rep.max_residual, prev);
    prev = rep.max_residual;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(WeakBV, HalfSpaceConstants) {
  const auto patch = Domain::half_space_patch({-1.0, -1.0}, {0.0, 1.0});
  const FirstOrderOperator q({Field(1.0), Field(0.0)}, Field(0.0));
  const auto fam = test_family(patch);
  EXPECT_LT(weak_bv_residual(q, {Field(1.0), Field(0.0), Field(1.0)}, fam, patch, 1).max_residual, 1e-12);
}

TEST(WeakBV, OffsetCandidateFails) {
  const auto patch = Domain::half_space_patch({-1.0, -1.0}, {0.0, 1.0});
  const FirstOrderOperator q({Field(1.0), Field(0.0)}, Field(0.0));
  const auto fam = test_family(patch);
  const Field g = sin(Field(2.0) * x2) + x2 * x2;
  const auto good = weak_bv_residual(q, {g, Field(0.0), g}, fam, patch, 3);
  const auto bad = weak_bv_residual(q, {g, Field(0.0), g + Field(1.0)}, fam, patch, 3);
  EXPECT_LT(good.max_residual, 1e-8);
  // phi_0 = (1 - x_1^2)^2 (1 - x_2^2)^2: the offset leaves int_{-1}^{1} (1 - x_2^2)^2 = 16/15,
  // and ||phi_0||^2 = (128/315) (256/315).
  // The candidate itself is not polynomial, so the match is limited by quadrature.
  EXPECT_NEAR(bad.records[0].residual, (16.0 / 15.0) * 315.0 / std::sqrt(128.0 * 256.0), 1e-8);
  EXPECT_THROW(weak_bv_residual(q, {g, Field(0.0), g}, {}, patch, 1), Error);
}

TEST(DbarBV, HolomorphicMonomialsOnDisc) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  for (int k = 0; k <= 3; ++k) {
    const auto f = scalar_form(1, pow(Field::z(1), k));
    EXPECT_LT(dbar_bv_residual(f, f.dbar(), f, disc, fam, 2).max_residual, 1e-12) << k;
  }
}

TEST(DbarBV, ConjugateCoordinateConverges) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  const auto f = scalar_form(1, Field::zbar(1));
  EXPECT_LT(dbar_bv_residual(f, f.dbar(), f, disc, fam, 2).max_residual, 1e-12);
  // Wrong boundary values are detected.
  const auto wrong = scalar_form(1, Field::z(1));
  EXPECT_GT(dbar_bv_residual(f, f.dbar(), wrong, disc, fam, 2).max_residual, 1e-2);
}

TEST(DbarBV, MeromorphicOutsideTheDisc) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  const auto f = scalar_form(1, Field(1.0) / (Field::z(1) - Field(2.0)));
  double prev = 1e300;
  for (int level = 0; level <= 3; ++level) {
    const double r = dbar_bv_residual(f, f.dbar(), f, disc, fam, level).max_residual;
    EXPECT_LE(r, std::max(prev, 1e-14));
    prev = r;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(DbarBV, BidegreeMismatchThrows) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  const auto f = scalar_form(1, Field::z(1));
  EXPECT_THROW(dbar_bv_residual(f, f, f, disc, fam, 1), Error);
}

TEST(Equivalence, HolomorphicMonomialsAgree) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  for (int k = 0; k <= 3; ++k) {
    const auto f = scalar_form(1, pow(Field::z(1), k));
    const auto rep = equivalence_check(f, f.dbar(), f, disc, fam, 2);
    EXPECT_LT(rep.wedge_form.max_residual, 1e-8);
    EXPECT_LT(rep.adjoint_form.max_residual, 1e-8);
    EXPECT_LT(rep.max_gap, 1e-8);
  }
}

TEST(Equivalence, ConjugateCoordinateAndOffsets) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  const auto f = scalar_form(1, Field::zbar(1));
  const auto rep = equivalence_check(f, f.dbar(), f, disc, fam, 2);
  EXPECT_LT(rep.max_gap, 1e-12);
  // A wrong f_b gives the same nonzero residual in both pipelines.
  const auto off = equivalence_check(f, f.dbar(), scalar_form(1, Field::zbar(1) + Field(0.5)), disc, fam, 2);
  EXPECT_GT(off.wedge_form.max_residual, 1e-2);
  EXPECT_LT(off.max_gap, 1e-12);
}

TEST(Equivalence, ZeroFormIsExactlyZero) {
  const auto disc = Domain::ball(2);
  const auto fam = form_test_family(1, 0, disc);
  const DifferentialForm zero(1, {0, 0});
  const DifferentialForm zero1(1, {0, 1});
  const auto rep = equivalence_check(zero, zero1, zero, disc, fam, 1);
  EXPECT_EQ(rep.wedge_form.max_residual, 0.0);
  EXPECT_EQ(rep.adjoint_form.max_residual, 0.0);
}

TEST(Equivalence, OneFormsInC2) {
  const auto ball = Domain::ball(4);
  const auto fam = form_test_family(2, 1, ball, {12, 3, 2});
  const auto f = one_form(2, 1, Field::z(1) * Field::zbar(2)) + one_form(2, 2, Field::zbar(1));
  const auto rep = equivalence_check(f, f.dbar(), f, ball, fam, 1);
  EXPECT_LT(rep.wedge_form.max_residual, 1e-10);
  EXPECT_LT(rep.adjoint_form.max_residual, 1e-10);
  const auto bad = equivalence_check(f, f.dbar(), one_form(2, 1, Field::z(2)), ball, fam, 1);
  EXPECT_GT(bad.wedge_form.max_residual, 1e-3);
  EXPECT_LT(bad.max_gap, 1e-10);
}

TEST(DbarBV, BoundaryValuesAreNotUnique) {
  // Adding h * dbar r (r = |z| - 1, dbar r = sum z_j dzbar_j / 2 on the sphere)
  // to f_b leaves the residual unchanged.
  const auto ball = Domain::ball(4);
  const auto fam = form_test_family(2, 1, ball, {12, 3, 2});
  const auto f = one_form(2, 1, Field::z(1) * Field::zbar(2)) + one_form(2, 2, Field::zbar(1));
  const Field h = Field::parse("1 + z1*zb2 - 2*i*x3");
  const auto dbar_r = one_form(2, 1, Field::z(1) * Field(0.5)) + one_form(2, 2, Field::z(2) * Field(0.5));
  const auto shifted = f + h * dbar_r;
  const auto a = dbar_bv_residual(f, f.dbar(), f, ball, fam, 1);
  const auto b = dbar_bv_residual(f, f.dbar(), shifted, ball, fam, 1);
  for (size_t t = 0; t < fam.size(); ++t) EXPECT_NEAR(a.records[t].residual, b.records[t].residual, 1e-12);
  const auto c = dbar_weak_bv_residual(f, f.dbar(), shifted, ball, fam, 1);
  EXPECT_LT(c.max_residual, 1e-10);
}

TEST(Split, Examples) {
  const auto frame = geometry::boundary_frame(Domain::half_space_patch({-1.0, -1.0}, {0.0, 1.0}), Point{0.0, 0.3});
  const auto s1 = normal_tangential_split(FirstOrderOperator({Field(1.0), Field(0.0)}, Field(0.0)), frame);
  EXPECT_TRUE(same_poly(s1.normal_coefficient, Field(1.0)));
  EXPECT_TRUE(s1.remainder.a()[1].is_zero());
  EXPECT_TRUE(s1.remainder.b().is_zero());
  const auto s2 = normal_tangential_split(FirstOrderOperator({Field(1.0), Field(1.0)}, Field(0.0)), frame);
  EXPECT_TRUE(same_poly(s2.remainder.a()[1], Field(-1.0)));
  EXPECT_TRUE(s2.remainder.a()[0].is_zero());
  const auto disc_frame = geometry::boundary_frame(Domain::ball(2), Point{0.0, 1.0});
  EXPECT_THROW(normal_tangential_split(FirstOrderOperator({Field(1.0), Field(0.0)}, Field(0.0)), disc_frame), Error);
}

TEST(Split, IdentityOnRandomPolynomials) {
  numeric::Rng rng(8);
  const auto frame = geometry::boundary_frame(Domain::half_space_patch({-1.0, -1.0}, {0.0, 1.0}), Point{0.0, 0.3});
  const FirstOrderOperator q({x2 + Field(kI) * x1, random_poly(rng, 2, 2)}, random_poly(rng, 2, 1));
  const auto split = normal_tangential_split(q, frame);
  EXPECT_TRUE(same_poly(split.normal_coefficient, x2 - Field(kI) * x1));
  const auto adj = formal_adjoint(q);
  for (int t = 0; t < 10; ++t) {
    const Field phi = random_poly(rng, 2, 4);
    const Field lhs = split.remainder.apply(phi) - split.normal_coefficient * phi.derivative(0);
    EXPECT_TRUE(same_poly(lhs, adj.apply(phi)));
  }
}
