#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "abclab/geometry.hpp"
#include "abclab/measure.hpp"

using namespace abclab;

namespace {

/// Leb_M sampled without pi: Gaussian direction on S, rejection on D.
SurfacePoint direct_sample(SurfaceKind kind, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  switch (kind) {
    case SurfaceKind::Annulus: return annulus_point(0.5 * (u(rng) + 1.0), u(rng));
    case SurfaceKind::Sphere: {
      double x = g(rng), y = g(rng), z = g(rng);
      double n = std::sqrt(x * x + y * y + z * z);
      return sphere_point(x / n, y / n, z / n);
    }
    case SurfaceKind::Disk:
      for (;;) {
        double x = u(rng), y = u(rng);
        if (x * x + y * y <= 1.0) return disk_point(x, y);
      }
  }
  return {};
}

}  // namespace

TEST(Geometry, ProjectionExamples) {
  SurfacePoint s = project_pi(AnnulusPoint(0.0, 0.0), SurfaceKind::Sphere);
  EXPECT_NEAR(s.c[0], 1.0, 1e-15);
  EXPECT_NEAR(s.c[2], 0.0, 1e-15);
  SurfacePoint n = project_pi(AnnulusPoint(0.3, 1.0), SurfaceKind::Sphere);
  EXPECT_NEAR(n.c[2], 1.0, 1e-15);
  SurfacePoint d = project_pi(AnnulusPoint(0.25, 1.0), SurfaceKind::Disk);
  EXPECT_NEAR(d.c[0], 0.0, 1e-15);
  EXPECT_NEAR(d.c[1], 1.0, 1e-15);
  SurfacePoint c = project_pi(AnnulusPoint(0.7, -1.0), SurfaceKind::Disk);
  EXPECT_TRUE(is_singular(c));
  EXPECT_THROW(project_pi_inverse(c), DomainError);
}

TEST(Geometry, HeightOutsideRangeThrows) {
  EXPECT_THROW(AnnulusPoint(0.0, 1.5), DomainError);
  EXPECT_THROW(validate(sphere_point(1.0, 1.0, 0.0)), DomainError);
  EXPECT_THROW(validate(disk_point(1.0, 0.5)), DomainError);
}

TEST(Geometry, RegionMembership) {
  EXPECT_FALSE(in_region_M_eta(annulus_point(0.2, 0.95), 0.1));
  EXPECT_TRUE(in_region_M_eta(annulus_point(0.2, 0.0), 0.5));
  EXPECT_TRUE(in_region_M_eta(sphere_point(0.0, 0.0, 1.0), 0.0));
  EXPECT_FALSE(in_region_M_eta(sphere_point(0.0, 0.0, 1.0), 0.1));
  EXPECT_FALSE(in_region_M_eta(disk_point(0.0, 0.0), 0.1));
}

TEST(Geometry, Diameters) {
  EXPECT_DOUBLE_EQ(diameter(SurfaceKind::Annulus), std::sqrt(4.25));
  EXPECT_DOUBLE_EQ(diameter(SurfaceKind::Sphere), 2.0);
  EXPECT_DOUBLE_EQ(diameter(SurfaceKind::Disk), 2.0);
  EXPECT_NEAR(dist(annulus_point(0.0, -1.0), annulus_point(0.5, 1.0)), diameter(SurfaceKind::Annulus), 1e-15);
  for (SurfaceKind k : kAllSurfaces) EXPECT_DOUBLE_EQ(unit_diameter_scale(k) * diameter(k), 0.5);
}

TEST(Geometry, RoundTrip) {
  std::mt19937_64 rng(11);
  for (SurfaceKind k : kAllSurfaces)
    for (int i = 0; i < 10000; ++i) {
      AnnulusPoint a = sample_annulus_region(rng, 1e-6);
      AnnulusPoint b = project_pi_inverse(project_pi(a, k));
      EXPECT_LE(std::abs(torus_delta(a.theta, b.theta)), 1e-10);
      EXPECT_LE(std::abs(a.y - b.y), 1e-10);
    }
}

TEST(Geometry, MeasurePreservation) {
  std::mt19937_64 rng(5);
  const int n = 200000;
  for (SurfaceKind k : kAllSurfaces)
    for (int box = 0; box < 5; ++box) {
      double t0 = uniform01(rng), t1 = t0 + 0.5 * uniform01(rng);
      double y0 = -1.0 + 1.5 * uniform01(rng), y1 = y0 + (1.0 - y0) * uniform01(rng);
      double p = (t1 - t0) * (y1 - y0) / 2.0;
      int hit = 0;
      for (int i = 0; i < n; ++i) {
        AnnulusPoint a = annulus_chart(direct_sample(k, rng));
        double t = a.theta < t0 ? a.theta + 1.0 : a.theta;
        if (t < t1 && a.y >= y0 && a.y < y1) ++hit;
      }
      double sigma = std::sqrt(p * (1.0 - p) / n);
      EXPECT_LE(std::abs(hit / static_cast<double>(n) - p), 3.0 * sigma + 1e-12) << to_string(k);
    }
}

TEST(Geometry, LatitudeSeparation) {
  const int grid = 40;
  for (SurfaceKind k : kAllSurfaces)
    for (int i = 0; i <= grid; ++i)
      for (int j = i + 1; j <= grid; ++j) {
        double y = -1.0 + 2.0 * i / grid, yp = -1.0 + 2.0 * j / grid;
        double best = 1e9;
        for (int a = 0; a < grid; ++a)
          for (int b = 0; b < grid; ++b)
            best = std::min(best, dist(project_pi(AnnulusPoint(double(a) / grid, y), k),
                                       project_pi(AnnulusPoint(double(b) / grid, yp), k)));
        EXPECT_GE(best, std::abs(y - yp) / 4.0 - 1e-15) << to_string(k);
      }
}

TEST(Geometry, LongitudeHolder) {
  std::mt19937_64 rng(3);
  for (SurfaceKind k : kAllSurfaces)
    for (int i = 0; i < 20000; ++i) {
      double t = uniform01(rng), y = 2.0 * uniform01(rng) - 1.0, yp = 2.0 * uniform01(rng) - 1.0;
      double d = dist(project_pi(AnnulusPoint(t, y), k), project_pi(AnnulusPoint(t, yp), k));
      EXPECT_LE(d, kLongitudeHolderConstant * std::sqrt(std::abs(y - yp)) + 1e-12);
    }
}

TEST(Geometry, MetricAxioms) {
  for (SurfaceKind k : kAllSurfaces) {
    auto x = lebesgue_sample(k, 10000, 1), y = lebesgue_sample(k, 10000, 2), z = lebesgue_sample(k, 10000, 3);
    for (int i = 0; i < 10000; ++i) {
      EXPECT_EQ(dist(x[i], x[i]), 0.0);
      EXPECT_EQ(dist(x[i], y[i]), dist(y[i], x[i]));
      EXPECT_LE(dist(x[i], z[i]), dist(x[i], y[i]) + dist(y[i], z[i]) + 1e-15);
    }
  }
}

TEST(Geometry, KindMismatchThrows) {
  EXPECT_THROW(dist(annulus_point(0, 0), disk_point(0, 0)), KindMismatch);
}

TEST(Geometry, MuYIsRotationEquivariant) {
  DiscreteMeasure m = mu_y_measure(0.3, SurfaceKind::Sphere, 12);
  EXPECT_EQ(m.size(), 12u);
  for (std::size_t j = 0; j < 12; ++j) {
    AnnulusPoint a = annulus_chart(m.point(j));
    EXPECT_NEAR(a.theta, (j + 0.5) / 12.0, 1e-14);
    EXPECT_NEAR(m.weight(j), 1.0 / 12.0, 1e-16);
  }
}
