#pragma once

// Post-hoc measurements on a finished finite-stage map: how close orbit
// measures are to Lebesgue, and how fast the set of orbit measures fills
// the space of measures (local emergence). The limit map is replaced by the
// final conjugated rotation, whose orbits close after q steps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "abclab/abc_engine.hpp"
#include "abclab/lebesgue_grid.hpp"
#include "abclab/measure.hpp"
#include "abclab/orbits.hpp"
#include "abclab/parallel.hpp"
#include "abclab/separation.hpp"
#include "abclab/transport.hpp"

namespace abclab {

/// Orbits up to this length are transported point by point.
inline constexpr std::int64_t kExactOrbitLimit = 4096;

struct ErgodicityReport {
  std::int64_t q = 0;
  double region_eta = 0.0;
  std::vector<AnnulusPoint> samples;  // chart points x
  std::vector<double> values;         // bound on d_K(e^f_q(x), Leb_grid)
  double radius = 0.0;                // d_K(Leb_grid, Leb)
  double max_value = 0.0;
  double mean_value = 0.0;

  /// Fraction of samples with d_K(e^f_q(x), Leb) <= t, counted as
  /// value <= t + radius.
  double fraction_below(double t) const {
    if (values.empty()) return 0.0;
    auto n = std::count_if(values.begin(), values.end(), [&](double v) { return v <= t + radius; });
    return static_cast<double>(n) / static_cast<double>(values.size());
  }
};

namespace detail {

/// The q-periodic orbit of f through x as an equal-weight measure.
inline DiscreteMeasure periodic_orbit(const MapExpr& f, const AnnulusPoint& x, std::int64_t q) {
  if (q > static_cast<std::int64_t>(kDefaultSupportCap)) throw SupportTooLarge("orbit exceeds the transport cap");
  std::vector<SurfacePoint> pts;
  pts.reserve(static_cast<std::size_t>(q));
  AnnulusPoint p = x;
  for (std::int64_t j = 0; j < q; ++j) {
    pts.push_back(project_pi(p, f.kind()));
    p = apply_chart(f, p);
  }
  return DiscreteMeasure::uniform(std::move(pts));
}

/// Orbit of h R_{p/q} h^-1 through h(w): h of the q-point lattice through w.
inline DiscreteMeasure conjugated_orbit(const ConjugatedRotation& c, const AnnulusPoint& w) {
  const std::int64_t q = to_int64(c.alpha.den());
  const std::int64_t p = to_int64(c.alpha.num());
  if (q > static_cast<std::int64_t>(kDefaultSupportCap)) throw SupportTooLarge("orbit exceeds the transport cap");
  std::vector<SurfacePoint> pts;
  pts.reserve(static_cast<std::size_t>(q));
  for (std::int64_t j = 0; j < q; ++j)
    pts.push_back(project_pi(apply_chart(c.h, AnnulusPoint(w.theta + frac_multiple(p, q, j), w.y)), c.h.kind()));
  return DiscreteMeasure::uniform(std::move(pts));
}

}  // namespace detail

/// For a conjugated rotation h R h^-1 the samples are x = h(w) with w drawn
/// from M_eta; otherwise x is drawn from M_eta directly.
inline ErgodicityReport ergodicity_report(const MapExpr& f, std::int64_t q, double region_eta, std::size_t samples,
                                          std::size_t resolution, std::uint64_t seed) {
  if (q < 1) throw DomainError("ergodicity report needs q >= 1");
  ErgodicityReport r;
  r.q = q;
  r.region_eta = region_eta;
  const auto conj = as_conjugated_rotation(f);
  const bool closed = conj && conj->alpha.den() == BigInt(q);
  if (!closed && q > kExactOrbitLimit) throw SupportTooLarge("orbit exceeds the transport cap");
  const LebesgueGrid grid = LebesgueGrid::square(f.kind(), resolution);
  r.radius = grid.radius();
  std::mt19937_64 rng(seed);
  std::vector<AnnulusPoint> ws(samples);
  for (auto& w : ws) w = sample_annulus_region(rng, region_eta);
  r.samples.resize(samples);
  r.values.resize(samples);
  parallel_for(samples, [&](std::size_t i) {
    if (closed) {
      r.samples[i] = apply_chart(conj->h, ws[i]);
      r.values[i] = q <= kExactOrbitLimit
                        ? kantorovich_to_lebesgue(detail::conjugated_orbit(*conj, ws[i]), grid).value
                        : periodic_orbit_distance(conj->h, ws[i].y, static_cast<double>(q), grid).value;
    } else {
      r.samples[i] = ws[i];
      r.values[i] = kantorovich_to_lebesgue(detail::periodic_orbit(f, ws[i], q), grid).value;
    }
  });
  for (double v : r.values) r.max_value = std::max(r.max_value, v);
  if (samples) r.mean_value = std::accumulate(r.values.begin(), r.values.end(), 0.0) / static_cast<double>(samples);
  return r;
}

struct EmergenceReport {
  double scale = 0.0;  // normalized units (diameter 1/2)
  std::vector<double> masses;
  std::vector<double> integrand;  // log|log mass| / |log scale|
  std::vector<bool> floored;      // mass raised to 1/samples
  std::vector<bool> saturated;    // mass lowered to 1 - 1/samples
  double mean_integrand = 0.0;
};

/// Pairwise normalized d_K between orbit measures of sampled points. For a
/// conjugated rotation the orbit of h(w) is h_* mu_{w.y} with `atoms` atoms.
inline std::vector<std::vector<double>> orbit_measure_distances(const MapExpr& f, std::int64_t q,
                                                                const std::vector<AnnulusPoint>& xs,
                                                                std::size_t atoms) {
  const auto conj = as_conjugated_rotation(f);
  const std::size_t n = xs.size();
  std::vector<DiscreteMeasure> e(n);
  parallel_for(n, [&](std::size_t i) {
    if (conj && conj->alpha.den() != BigInt(1)) {
      AnnulusPoint w = apply_chart(conj->h, xs[i], true);
      e[i] = pushforward(conj->h, mu_y_measure(w.y, f.kind(), atoms, wrap01(w.theta * static_cast<double>(atoms))));
    } else {
      e[i] = detail::periodic_orbit(f, xs[i], q);
    }
  });
  const double s = unit_diameter_scale(f.kind());
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> v(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) { v[k] = s * kantorovich_value(e[pairs[k].first], e[pairs[k].second]); });
  for (std::size_t k = 0; k < pairs.size(); ++k) d[pairs[k].first][pairs[k].second] = d[pairs[k].second][pairs[k].first] = v[k];
  return d;
}

/// Ball masses and the emergence integrand from a normalized distance
/// matrix. Each point counts itself.
inline EmergenceReport emergence_report_from_matrix(const std::vector<std::vector<double>>& d, double scale) {
  if (!(scale > 0.0 && scale < 1.0)) throw DomainError("emergence scale must lie in (0,1)");
  EmergenceReport r;
  r.scale = scale;
  const std::size_t n = d.size();
  if (n == 0) return r;
  const double nd = static_cast<double>(n);
  const double lo = 1.0 / nd;
  const double hi = 1.0 - 1.0 / nd;
  for (std::size_t i = 0; i < n; ++i) {
    double m = row_mass(d[i], scale);
    bool fl = m < lo, sat = m > hi && n > 1;
    if (fl) m = lo;
    if (sat) m = hi;
    r.masses.push_back(m);
    r.floored.push_back(fl);
    r.saturated.push_back(sat);
    r.integrand.push_back(std::log(std::abs(std::log(m))) / std::abs(std::log(scale)));
  }
  r.mean_integrand = std::accumulate(r.integrand.begin(), r.integrand.end(), 0.0) / nd;
  return r;
}

/// x_i ~ Leb; one report per scale (normalized units, descending).
inline std::vector<EmergenceReport> emergence_order_estimate(const MapExpr& f, std::int64_t q,
                                                             const std::vector<double>& scales, std::size_t samples,
                                                             std::uint64_t seed, std::size_t atoms = 64) {
  if (q < 1) throw DomainError("emergence estimate needs q >= 1");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0.0)) throw DomainError("scales must be positive");
    if (k && scales[k] > scales[k - 1]) throw DomainError("scales must be descending");
  }
  std::mt19937_64 rng(seed);
  std::vector<AnnulusPoint> xs(samples);
  for (auto& x : xs) x = sample_annulus_region(rng, 0.0);
  const auto d = orbit_measure_distances(f, q, xs, atoms);
  std::vector<EmergenceReport> out;
  for (double s : scales) out.push_back(emergence_report_from_matrix(d, s));
  return out;
}

struct EmerCheckResult {
  std::vector<double> masses;  // per sampled x, fraction of x' with d <= eta/2
  double max_mass = 0.0;
  double bound = 0.0;  // (3 + eps) delta
  double slack = 0.0;  // sampling allowance
  double delta_recomputed = 0.0;
  bool pass = false;
};

inline double delta_of(double eta, double eps_prev) { return std::exp(-std::pow(eta, -2.0 + eps_prev)); }

/// For x = h(w), w in M_{eps_{n-1}}: the mass of x' ~ Leb whose orbit measure
/// lies within eta_n/2 of that of x must stay below (3 + eps_n) delta_n.
inline EmerCheckResult fact_emer_check(const SchemeState& s, const MapExpr& h_limit, std::size_t samples,
                                      std::size_t resolution, std::uint64_t seed) {
  EmerCheckResult r;
  r.delta_recomputed = delta_of(s.eta, s.eps_prev);
  r.bound = (3.0 + s.eps) * s.delta;
  r.slack = 1.5 / std::sqrt(static_cast<double>(std::max<std::size_t>(samples, 1)));
  std::mt19937_64 rng(seed);
  std::vector<AnnulusPoint> ws(samples), vs(samples);
  for (auto& w : ws) w = sample_annulus_region(rng, s.eps_prev);
  for (auto& v : vs) v = apply_chart(h_limit, sample_annulus_region(rng, 0.0), true);
  const SurfaceKind kind = h_limit.kind();
  auto image = [&](const AnnulusPoint& w) { return pushforward(h_limit, mu_y_measure(w.y, kind, resolution)); };
  std::vector<DiscreteMeasure> ex(samples), ey(samples);
  parallel_for(samples, [&](std::size_t i) {
    ex[i] = image(ws[i]);
    ey[i] = image(vs[i]);
  });
  const double sc = unit_diameter_scale(kind);
  r.masses.assign(samples, 0.0);
  parallel_for(samples, [&](std::size_t i) {
    std::size_t hit = 0;
    for (std::size_t j = 0; j < samples; ++j)
      if (sc * kantorovich_value(ex[i], ey[j]) <= s.eta / 2.0) ++hit;
    r.masses[i] = static_cast<double>(hit) / static_cast<double>(samples);
  });
  for (double m : r.masses) r.max_mass = std::max(r.max_mass, m);
  r.pass = samples > 0 && r.max_mass <= r.bound + r.slack;
  return r;
}

/// Full matrix of d_K(h_* mu_y, h_* mu_y') on the midpoint grid of [-1, 1].
inline std::vector<std::vector<double>> separation_profile(const MapExpr& h, std::size_t y_grid, std::size_t m) {
  return separation_matrix(h, midpoint_grid(-1.0, 1.0, y_grid), m);
}

}  // namespace abclab
