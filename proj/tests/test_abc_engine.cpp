#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "abclab/abc_engine.hpp"
#include "abclab/kickers.hpp"

using namespace abclab;

namespace {

MapExpr random_box(SurfaceKind k, std::int64_t q, std::mt19937_64& rng) {
  std::vector<std::uint32_t> p(16);
  std::iota(p.begin(), p.end(), 0u);
  std::shuffle(p.begin(), p.end(), rng);
  return MapExpr::box_exchange(k, BoxExchangeSpec(q, 4, 4, -0.9, 0.9, p));
}

/// eta for the identity on A from the closed form d = s |y - y'|.
double identity_eta(double eps_prime, std::size_t y_grid, std::size_t eta_grid) {
  const double s = unit_diameter_scale(SurfaceKind::Annulus);
  std::vector<double> ys(y_grid);
  for (std::size_t i = 0; i < y_grid; ++i) ys[i] = -1.0 + (2.0 * i + 1.0) / y_grid;
  double best = 1.0;
  for (std::size_t c = 0; c < eta_grid; ++c) {
    double e = std::exp2(-10.0 * c / (eta_grid - 1.0));
    bool ok = true;
    bool any = false;
    for (double y : ys) {
      if (!(std::abs(y) < 1.0 - eps_prime)) continue;
      any = true;
      std::size_t n = 0;
      for (double yp : ys) n += s * std::abs(y - yp) <= e;
      ok = ok && static_cast<double>(n) / y_grid <= 3.0 * std::exp(-std::pow(e, -2.0 + eps_prime));
    }
    if (any && ok) best = std::min(best, e);
  }
  return best;
}

}  // namespace

TEST(ChooseAlpha, StaysWithinNuAndRaisesDenominator) {
  Rational alpha(2, 7);
  for (Rational nu : {Rational(1, 10), Rational(1, 1000), Rational(3, 100000)}) {
    Rational a = choose_next_alpha(alpha, nu, BigInt(50));
    Rational gap = a - alpha;
    EXPECT_GT(gap, Rational(0));
    EXPECT_LT(gap, nu);
    EXPECT_GE(a.den(), BigInt(50));
  }
  EXPECT_THROW(choose_next_alpha(alpha, Rational(0), BigInt(2)), DomainError);
}

TEST(Eta, IdentityMatchesClosedForm) {
  for (double e : {0.2, 0.5, 0.9})
    EXPECT_DOUBLE_EQ(eta_of(MapExpr::identity(SurfaceKind::Annulus), e, 32, 41, 16), identity_eta(e, 32, 41));
}

TEST(Eta, RangeAndMonotonicity) {
  std::mt19937_64 rng(31);
  for (SurfaceKind k : kAllSurfaces) {
    MapExpr h = random_box(k, 1 + rng() % 3, rng);
    double prev = 2.0;
    for (double e : {0.2, 0.4, 0.8, 1.2, 1.6}) {
      double v = eta_of(h, e, 16, 41, 16);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
  EXPECT_THROW(eta_of(MapExpr::identity(SurfaceKind::Disk), 2.0, 8, 5, 8), DomainError);
}

TEST(ErgodicKicker, CertificateHoldsAtSmallScale) {
  ErgodicKickerOptions opt;
  opt.y_grid = 8;
  ErgodicKicker k = build_ergodic_kicker(2, 0.3, SurfaceKind::Annulus, opt);
  EXPECT_TRUE(k.certificate.holds());
  EXPECT_EQ(k.certificate.values.size(), 8u);
  EXPECT_LE(k.certificate.max_value, 0.3 + k.certificate.radius);
}

TEST(ErgodicKicker, CapIsEnforced) {
  EXPECT_THROW(build_ergodic_kicker(3, 0.01, SurfaceKind::Sphere, std::size_t{64}), ResolutionExceeded);
}

TEST(EmergenceKicker, DisplacementAndSupport) {
  EmergenceKickerOptions opt;
  opt.y_grid = 16;
  opt.atoms = 32;
  EmergenceKicker g = build_emergence_kicker(2, 0.4, 0.1, 2, SurfaceKind::Annulus, opt);
  EXPECT_LE(g.displacement_bound, 0.4);
  // Identity outside the band.
  AnnulusPoint x(0.3, 0.95);
  AnnulusPoint y = apply_chart(g.map, x);
  EXPECT_EQ(x.theta, y.theta);
  EXPECT_EQ(x.y, y.y);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    AnnulusPoint a = sample_annulus_region(rng, 0.0);
    SurfacePoint pa = project_pi(a, SurfaceKind::Annulus);
    EXPECT_LE(dist(evaluate(g.map, pa), pa), g.displacement_bound + 1e-12);
  }
}

TEST(ErgodicScheme, FirstStageOnAnnulus) {
  EngineParams p;
  p.kind = SurfaceKind::Annulus;
  p.stages = 1;
  p.orbit_samples = 20;
  p.c0_samples = 500;
  p.q_samples = 200;
  SchemeRun run = run_scheme(p);
  ASSERT_EQ(run.states.size(), 2u);
  EXPECT_TRUE(run.passed());
  const SchemeState& s = run.states[1];
  EXPECT_DOUBLE_EQ(s.eps, 0.25);
  EXPECT_GT(s.alpha.den(), BigInt(1));
  for (const auto& e : s.ledger) EXPECT_TRUE(e.pass) << e.id;
  ASSERT_EQ(run.cauchy.size(), 1u);
  EXPECT_LE(run.cauchy[0].measured, run.cauchy[0].bound);
}

TEST(ErgodicScheme, SeedDeterminesResult) {
  EngineParams p;
  p.stages = 1;
  p.orbit_samples = 10;
  p.c0_samples = 300;
  p.q_samples = 100;
  SchemeRun a = run_scheme(p), b = run_scheme(p);
  ASSERT_EQ(a.ledger().size(), b.ledger().size());
  for (std::size_t i = 0; i < a.ledger().size(); ++i) {
    EXPECT_EQ(a.ledger()[i].id, b.ledger()[i].id);
    EXPECT_EQ(a.ledger()[i].measured, b.ledger()[i].measured);
  }
  EXPECT_EQ(a.states.back().alpha, b.states.back().alpha);
}

TEST(EmergenceScheme, InitialState) {
  EngineParams p;
  p.mode = SchemeMode::Emergence;
  SchemeState s = initial_state(p);
  EXPECT_EQ(s.eps, 0.25);
  EXPECT_GT(s.eta, 0.0);
  EXPECT_LE(s.eta, 1.0);
  EXPECT_NEAR(s.delta, std::exp(-std::pow(s.eta, -1.0)), 1e-15);
}

TEST(EmergenceScheme, StageFailureCarriesStates) {
  EngineParams p;
  p.mode = SchemeMode::Emergence;
  p.stages = 1;
  p.resolution_retries = 0;
  p.kicker_box_cap = 64;
  try {
    run_scheme(p);
    FAIL() << "expected a stage failure under a tiny box cap";
  } catch (const StageFailed& e) {
    EXPECT_FALSE(e.condition.empty());
    EXPECT_EQ(e.states.size(), 2u);
  }
}
