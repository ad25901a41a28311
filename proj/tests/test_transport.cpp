#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "abclab/lebesgue_grid.hpp"
#include "abclab/map_metrics.hpp"
#include "abclab/segments.hpp"
#include "abclab/transport.hpp"
#include "support/oracles.hpp"

using namespace abclab;

TEST(Transport, MatchesBruteForceOracle) {
  std::mt19937_64 rng(21);
  for (SurfaceKind k : kAllSurfaces)
    for (int t = 0; t < 40; ++t) {
      auto a = oracle::random_measure(k, 1 + rng() % 12, rng);
      auto b = oracle::random_measure(k, 1 + rng() % 12, rng);
      double ref = oracle::kantorovich(a, b);
      EXPECT_LE(std::abs(kantorovich_value(a, b) - ref), 1e-9 * std::max(ref, 1e-300)) << to_string(k);
    }
}

TEST(Transport, PlanIsFeasible) {
  std::mt19937_64 rng(22);
  auto a = oracle::random_measure(SurfaceKind::Sphere, 9, rng);
  auto b = oracle::random_measure(SurfaceKind::Sphere, 7, rng);
  KantorovichResult r = kantorovich(a, b);
  std::vector<double> out(r.plan.source.size(), 0.0), in(r.plan.target.size(), 0.0);
  for (const auto& e : r.plan.entries) {
    EXPECT_GE(e.mass, 0.0);
    out[e.source] += e.mass;
    in[e.target] += e.mass;
  }
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], r.plan.source.weight(i), 1e-12);
  for (std::size_t j = 0; j < in.size(); ++j) EXPECT_NEAR(in[j], r.plan.target.weight(j), 1e-12);
}

TEST(Transport, DiracPairIsPointDistance) {
  SurfacePoint x = disk_point(0.3, -0.2), y = disk_point(-0.5, 0.4);
  EXPECT_NEAR(kantorovich_value(DiscreteMeasure::dirac(x), DiscreteMeasure::dirac(y)), dist(x, y), 1e-15);
}

TEST(Transport, DuplicatePointsMerge) {
  SurfacePoint x = annulus_point(0.1, 0.0);
  DiscreteMeasure a({x, x}, {0.5, 0.5});
  EXPECT_EQ(a.merged().size(), 1u);
  EXPECT_NEAR(kantorovich_value(a, DiscreteMeasure::dirac(x)), 0.0, 1e-15);
}

TEST(Transport, InvalidMeasuresThrow) {
  SurfacePoint x = annulus_point(0.1, 0.0);
  EXPECT_ANY_THROW(DiscreteMeasure({x}, {0.5}));
  EXPECT_ANY_THROW(DiscreteMeasure({x, x}, {1.5, -0.5}));
  EXPECT_THROW(kantorovich_value(DiscreteMeasure::dirac(x), DiscreteMeasure::dirac(disk_point(0, 0))), KindMismatch);
  auto big = lebesgue_sample(SurfaceKind::Annulus, 3000, 1);
  EXPECT_THROW(kantorovich_value(DiscreteMeasure::uniform(big), DiscreteMeasure::uniform(big)), SupportTooLarge);
}

TEST(Transport, LongitudeClosedForm) {
  std::mt19937_64 rng(23);
  for (SurfaceKind k : {SurfaceKind::Annulus, SurfaceKind::Disk})
    for (int t = 0; t < 20; ++t) {
      const double theta = uniform01(rng);
      auto line = [&](std::size_t n, std::vector<std::pair<double, double>>& coord) {
        std::vector<SurfacePoint> pts;
        auto w = oracle::random_weights(rng, n);
        for (std::size_t i = 0; i < n; ++i) {
          double y = 2.0 * uniform01(rng) - 1.0;
          pts.push_back(project_pi(AnnulusPoint(theta, y), k));
          // Arc-length coordinate along the longitude.
          coord.emplace_back(k == SurfaceKind::Annulus ? y : std::sqrt((1.0 + y) / 2.0), w[i]);
        }
        return DiscreteMeasure(std::move(pts), std::move(w));
      };
      std::vector<std::pair<double, double>> ca, cb;
      auto a = line(1 + rng() % 10, ca), b = line(1 + rng() % 10, cb);
      EXPECT_NEAR(kantorovich_value(a, b), oracle::cdf_distance(ca, cb), 1e-9);
    }
}

TEST(Transport, MetricProperties) {
  std::mt19937_64 rng(24);
  for (SurfaceKind k : kAllSurfaces)
    for (int t = 0; t < 20; ++t) {
      auto a = oracle::random_measure(k, 6, rng), b = oracle::random_measure(k, 5, rng),
           c = oracle::random_measure(k, 7, rng);
      double ab = kantorovich_value(a, b);
      EXPECT_NEAR(ab, kantorovich_value(b, a), 1e-12);
      EXPECT_LE(ab, kantorovich_value(a, c) + kantorovich_value(c, b) + 1e-12);
      EXPECT_NEAR(kantorovich_value(a, a), 0.0, 1e-15);
      EXPECT_LE(ab, diameter(k) + 1e-12);
    }
}

TEST(Transport, RotationPushforwardBoundedByC0) {
  std::mt19937_64 rng(25);
  for (SurfaceKind k : kAllSurfaces)
    for (int t = 0; t < 20; ++t) {
      double a = uniform01(rng), b = uniform01(rng);
      auto mu = oracle::random_measure(k, 8, rng);
      double lhs = kantorovich_value(pushforward(MapExpr::rotation(k, a), mu), pushforward(MapExpr::rotation(k, b), mu));
      EXPECT_LE(lhs, rotation_c0_distance(k, a, b, 0.0) + 1e-9);
    }
}

TEST(Transport, RotationsAreIsometries) {
  std::mt19937_64 rng(26);
  for (SurfaceKind k : kAllSurfaces)
    for (int t = 0; t < 20; ++t) {
      MapExpr r = MapExpr::rotation(k, uniform01(rng));
      auto a = oracle::random_measure(k, 7, rng), b = oracle::random_measure(k, 7, rng);
      EXPECT_NEAR(kantorovich_value(pushforward(r, a), pushforward(r, b)), kantorovich_value(a, b), 1e-9);
    }
}

TEST(Transport, LatitudeMeasuresOnAnnulus) {
  // Identical atoms shifted vertically: the distance is the height gap.
  for (double y : {-0.9, -0.3, 0.2})
    for (double yp : {-0.5, 0.1, 0.8}) {
      double d = kantorovich_value(mu_y_measure(y, SurfaceKind::Annulus, 16), mu_y_measure(yp, SurfaceKind::Annulus, 16));
      EXPECT_NEAR(d, std::abs(y - yp), 1e-12);
    }
}

TEST(LebesgueGrid, BoundDominatesExactDistance) {
  std::mt19937_64 rng(27);
  for (SurfaceKind k : kAllSurfaces) {
    LebesgueGrid grid = LebesgueGrid::square(k, 8);
    for (int t = 0; t < 5; ++t) {
      auto mu = oracle::random_measure(k, 10, rng);
      double exact = kantorovich_value(mu, grid.measure());
      double bound = kantorovich_to_lebesgue(mu, grid).value;
      EXPECT_GE(bound, exact - 1e-9) << to_string(k);
    }
    EXPECT_GT(grid.radius(), 0.0);
    EXPECT_NEAR(kantorovich_to_lebesgue(grid.measure(), grid).value, 0.0, 1e-12);
  }
}

TEST(LebesgueGrid, CircleStreamAgreesWithAtoms) {
  for (SurfaceKind k : kAllSurfaces) {
    LebesgueGrid grid = LebesgueGrid::square(k, 16);
    for (double y : {-0.7, 0.05, 0.6}) {
      double streamed = pushforward_to_lebesgue(MapExpr::identity(k), circle_measure(y, k), grid).value;
      double atoms = kantorovich_to_lebesgue(mu_y_measure(y, k, 4096), grid).value;
      // Pieces are charged at their farther endpoint: up to half a cell more.
      const double atom_error = circle_length(k, y) / 4096;
      EXPECT_GE(streamed, atoms - atom_error) << to_string(k);
      EXPECT_LE(streamed, atoms + atom_error + circle_length(k, y) / 32) << to_string(k);
    }
  }
}

TEST(Segments, PushedCircleKeepsMass) {
  std::vector<std::uint32_t> perm = {3, 2, 1, 0, 5, 4};
  MapExpr box = MapExpr::box_exchange(SurfaceKind::Disk, BoxExchangeSpec(4, 3, 2, -0.5, 0.5, perm));
  MapExpr f = MapExpr::compose(box, MapExpr::rotation(SurfaceKind::Disk, Rational(1, 9)));
  for (double y : {-0.4, 0.3}) {
    SegmentMeasure out = push_segments(f, circle_measure(y, SurfaceKind::Disk));
    double mass = 0.0;
    for (const auto& s : out.segments) mass += s.mass;
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_EQ(out.error_bound, 0.0);
  }
}
