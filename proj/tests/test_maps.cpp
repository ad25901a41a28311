#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "abclab/box_exchange.hpp"
#include "abclab/map_expr.hpp"
#include "abclab/rational.hpp"

using namespace abclab;

namespace {

std::vector<std::uint32_t> random_perm(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

MapExpr random_box(SurfaceKind k, std::int64_t q, std::mt19937_64& rng) {
  return MapExpr::box_exchange(k, BoxExchangeSpec(q, 4, 3, -0.8, 0.8, random_perm(12, rng)));
}

double chart_gap(const AnnulusPoint& a, const AnnulusPoint& b) {
  return std::max(std::abs(torus_delta(a.theta, b.theta)), std::abs(a.y - b.y));
}

}  // namespace

TEST(Rational, ArithmeticIsExact) {
  Rational a(1, 3), b(1, 6);
  EXPECT_EQ(a + b, Rational(1, 2));
  EXPECT_EQ(a - b, Rational(1, 6));
  EXPECT_EQ(a * b, Rational(1, 18));
  EXPECT_EQ(a / b, Rational(2));
  EXPECT_EQ(Rational(4, -8), Rational(-1, 2));
  EXPECT_LT(Rational(1, 3), Rational(34, 100) - Rational(1, 1000) + Rational(1, 1000));
}

TEST(Rational, ParseAndDecimal) {
  EXPECT_EQ(Rational::parse("6/8"), Rational(3, 4));
  EXPECT_EQ(Rational::parse("5"), Rational(5));
  EXPECT_EQ(Rational::from_decimal(0.1), Rational(1, 10));
  EXPECT_EQ(Rational::from_decimal(-2.5), Rational(-5, 2));
  EXPECT_EQ(Rational(7, 3).mod1(), Rational(1, 3));
  EXPECT_EQ(Rational(-1, 3).mod1(), Rational(2, 3));
  EXPECT_EQ(Rational(3, 7).str(), "3/7");
}

TEST(Rational, HugeDenominators) {
  Rational x(BigInt("1"), BigInt("1000000000000000000000000000001"));
  EXPECT_FALSE(x.den_fits_int64());
  EXPECT_GT(x, Rational(0));
  EXPECT_NEAR(x.to_double(), 1e-30, 1e-44);
}

TEST(BoxExchange, RejectsNonPermutation) {
  EXPECT_THROW(BoxExchangeSpec(2, 2, 1, -1.0, 1.0, {0, 0}), std::invalid_argument);
  EXPECT_THROW(BoxExchangeSpec(2, 2, 1, -1.0, 1.0, {0}), std::invalid_argument);
  EXPECT_THROW(BoxExchangeSpec(2, 2, 1, 0.5, 0.2, {0, 1}), std::invalid_argument);
}

TEST(BoxExchange, FullGridMustCommuteWithRotation) {
  // Swap two columns in domain 0 only: not R_{1/2}-equivariant.
  std::vector<std::uint32_t> p = {1, 0, 2, 3};
  EXPECT_THROW(BoxExchangeSpec::from_full_grid(2, 4, 1, -1.0, 1.0, p), std::invalid_argument);
  std::vector<std::uint32_t> ok = {1, 0, 3, 2};
  BoxExchangeSpec s = BoxExchangeSpec::from_full_grid(2, 4, 1, -1.0, 1.0, ok);
  EXPECT_EQ(s.cols_per_domain(), 2u);
  EXPECT_EQ(s.perm(), (std::vector<std::uint32_t>{1, 0}));
}

TEST(BoxExchange, SwapsBoxesByTranslation) {
  MapExpr f = MapExpr::box_exchange(SurfaceKind::Annulus, BoxExchangeSpec(1, 2, 1, -0.5, 0.5, {1, 0}));
  AnnulusPoint a = apply_chart(f, AnnulusPoint(0.1, 0.2));
  EXPECT_NEAR(a.theta, 0.6, 1e-15);
  EXPECT_NEAR(a.y, 0.2, 1e-15);
  AnnulusPoint out = apply_chart(f, AnnulusPoint(0.1, 0.9));
  EXPECT_NEAR(out.theta, 0.1, 1e-15);
}

TEST(BoxExchange, CommutesWithDomainRotation) {
  std::mt19937_64 rng(4);
  const std::int64_t q = 5;
  for (SurfaceKind k : kAllSurfaces) {
    MapExpr f = random_box(k, q, rng);
    MapExpr r = MapExpr::rotation(k, Rational(2, q));
    for (int i = 0; i < 200; ++i) {
      AnnulusPoint x = sample_annulus_region(rng, 0.0);
      AnnulusPoint a = apply_chart(MapExpr::compose(f, r), x);
      AnnulusPoint b = apply_chart(MapExpr::compose(r, f), x);
      EXPECT_LE(chart_gap(a, b), 1e-12);
    }
  }
}

TEST(MapExpr, InverseRoundTrips) {
  std::mt19937_64 rng(8);
  for (SurfaceKind k : kAllSurfaces) {
    MapExpr h = MapExpr::compose(random_box(k, 3, rng), MapExpr::rotation(k, Rational(1, 7)));
    MapExpr f = MapExpr::conjugate(h, MapExpr::rotation(k, 0.123));
    for (MapExpr g : {h, f, MapExpr::compose(f, h)}) {
      MapExpr gi = MapExpr::inverse(g);
      for (int i = 0; i < 100; ++i) {
        AnnulusPoint x = sample_annulus_region(rng, 0.0);
        EXPECT_LE(chart_gap(apply_chart(gi, apply_chart(g, x)), x), 1e-12);
        EXPECT_LE(chart_gap(apply_chart(g, x, true), apply_chart(gi, x)), 1e-12);
      }
    }
  }
}

TEST(MapExpr, RotationActsOnAngle) {
  MapExpr r = MapExpr::rotation(SurfaceKind::Sphere, Rational(1, 4));
  SurfacePoint p = evaluate(r, sphere_point(1.0, 0.0, 0.0));
  EXPECT_NEAR(p.c[0], 0.0, 1e-15);
  EXPECT_NEAR(p.c[1], 1.0, 1e-15);
  SurfacePoint pole = sphere_point(0.0, 0.0, 1.0);
  EXPECT_EQ(evaluate(r, pole), pole);
}

TEST(MapExpr, ConjugateIsComposition) {
  std::mt19937_64 rng(9);
  MapExpr h = random_box(SurfaceKind::Disk, 2, rng);
  MapExpr r = MapExpr::rotation(SurfaceKind::Disk, Rational(1, 3));
  MapExpr c = MapExpr::conjugate(h, r);
  MapExpr manual = MapExpr::compose(h, MapExpr::compose(r, MapExpr::inverse(h)));
  for (int i = 0; i < 100; ++i) {
    AnnulusPoint x = sample_annulus_region(rng, 0.0);
    EXPECT_LE(chart_gap(apply_chart(c, x), apply_chart(manual, x)), 1e-12);
  }
}

TEST(MapExpr, RationalRotationIsPeriodic) {
  MapExpr r = MapExpr::rotation(SurfaceKind::Annulus, Rational(3, 7));
  SurfacePoint x = annulus_point(0.05, 0.3);
  SurfacePoint y = iterate(r, x, 7);
  EXPECT_NEAR(std::abs(torus_delta(x.c[0], y.c[0])), 0.0, 1e-12);
}

TEST(MapExpr, MixedSurfacesThrow) {
  EXPECT_THROW(MapExpr::compose(MapExpr::identity(SurfaceKind::Annulus), MapExpr::identity(SurfaceKind::Disk)),
               KindMismatch);
}

TEST(MapExpr, StructuralEquality) {
  MapExpr a = MapExpr::rotation(SurfaceKind::Annulus, Rational(1, 3));
  MapExpr b = MapExpr::rotation(SurfaceKind::Annulus, Rational(2, 6));
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == MapExpr::rotation(SurfaceKind::Annulus, Rational(1, 4)));
}
