#pragma once

// Stage-by-stage AbC constructions f_n = h_n R_{alpha_n} h_n^-1 for the
// ergodic and the emergence schemes. Each stage builds a commuting kicker,
// picks the next rational rotation number and records every condition it
// checked, with the measured value and the bound, in a ledger.

#include <chrono>
#include <functional>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "abclab/kickers.hpp"
#include "abclab/lebesgue_grid.hpp"
#include "abclab/map_metrics.hpp"
#include "abclab/orbits.hpp"
#include "abclab/parallel.hpp"
#include "abclab/rational.hpp"
#include "abclab/separation.hpp"

namespace abclab {

enum class SchemeMode { Ergodic, Emergence };

inline std::string_view to_string(SchemeMode m) { return m == SchemeMode::Ergodic ? "ergodic" : "emergence"; }

struct LedgerEntry {
  int stage = 0;
  std::string id;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  double seconds = 0.0;  // wall time, kept out of the serialized ledger
};

struct IntervalLedger {
  std::vector<RationalInterval> intervals;
  bool nested() const {
    for (std::size_t i = 1; i < intervals.size(); ++i)
      if (!intervals[i - 1].contains(intervals[i])) return false;
    return true;
  }
};

struct SchemeState {
  int n = 0;
  SchemeMode mode = SchemeMode::Ergodic;
  MapExpr h;
  Rational alpha{0};
  double eps = 0.5;  // in units where the surface diameter is 1/2
  double eta = 0.0;
  double delta = 0.0;
  double eps_prev = 1.0;
  Rational nu{0};  // nu(h_{n+1}, alpha_n), known once the next stage is accepted
  double bilipschitz = 1.0;
  std::uint32_t kicker_rows = 0;
  std::vector<LedgerEntry> ledger;

  MapExpr f() const { return MapExpr::conjugate(h, MapExpr::rotation(h.kind(), alpha)); }
  bool passed() const {
    for (const auto& e : ledger)
      if (!e.pass) return false;
    return true;
  }
};

struct EngineParams {
  SchemeMode mode = SchemeMode::Ergodic;
  SurfaceKind kind = SurfaceKind::Annulus;
  int stages = 3;
  std::uint64_t seed = 1;
  // kicker
  std::size_t kicker_box_cap = std::size_t{1} << 18;
  std::size_t kicker_y_grid = 16;
  std::size_t kicker_check_k_theta = 32;
  std::size_t kicker_check_k_y = 64;
  // equidistribution checks
  std::size_t leb_grid = 32;
  std::size_t orbit_samples = 100;
  std::size_t exact_orbit_terms = 1024;
  std::size_t c0_samples = 4000;
  std::size_t q_samples = 2000;
  // separation / eta
  std::size_t y_grid = 32;
  std::size_t eta_grid = 41;
  std::size_t support = 64;
  std::size_t colors = 2;
  std::size_t separation_y_grid = 32;
  std::size_t separation_support = 64;
  // policy
  int resolution_retries = 3;
  int max_halvings = 96;
  bool continue_on_failure = false;
  std::function<void(const std::string&)> log;  // progress lines, optional
};

struct StageFailed : std::runtime_error {
  std::string condition;
  std::vector<SchemeState> states;
  StageFailed(std::string cond, std::vector<SchemeState> st)
      : std::runtime_error("stage failed: " + cond), condition(std::move(cond)), states(std::move(st)) {}
};

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stage_seed(std::uint64_t base, int stage, int purpose) {
  return splitmix(splitmix(base) ^ (static_cast<std::uint64_t>(stage) << 16) ^ static_cast<std::uint64_t>(purpose));
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double lap() {
    auto t = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(t - t0).count();
    t0 = t;
    return s;
  }
};

inline double raw_distance(SurfaceKind kind, double normalized) { return normalized / unit_diameter_scale(kind); }

}  // namespace detail

/// alpha + 1/(k q) for the smallest k with k q >= min_denominator,
/// 1/(k q) < nu and reduced denominator >= min_denominator.
inline Rational choose_next_alpha(const Rational& alpha, const Rational& nu, const BigInt& min_denominator) {
  if (nu <= Rational(0)) throw DomainError("nu must be positive");
  const BigInt& q = alpha.den();
  // 1/(k q) < nu  <=>  k > nu.den / (nu.num q)
  BigInt k = nu.den() / (nu.num() * q) + 1;
  BigInt k_den = (min_denominator + q - 1) / q;
  if (k_den > k) k = k_den;
  for (;; ++k) {
    Rational out = alpha + Rational(BigInt(1), k * q);
    if (out.den() >= min_denominator) return out;
  }
}

inline Rational choose_next_alpha(const Rational& alpha, double nu, std::int64_t min_denominator) {
  return choose_next_alpha(alpha, Rational::from_decimal(nu), BigInt(min_denominator));
}

/// Separation matrix in units where the diameter is 1/2.
inline std::vector<std::vector<double>> normalized_separation(const MapExpr& h, const std::vector<double>& ys,
                                                              std::size_t m) {
  auto d = separation_matrix(h, ys, m);
  const double s = unit_diameter_scale(h.kind());
  for (auto& row : d)
    for (auto& v : row) v *= s;
  return d;
}

/// Geometric grid 1 = e_0 > e_1 > ... > e_{n-1} = 2^-10.
inline std::vector<double> eta_candidates(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? 1.0 : std::exp2(-10.0 * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

/// Rows of the midpoint y-grid lying in I_eps'. When no grid point lies in
/// I_eps' (eps' close to or above 1) the central rows stand in for it.
inline std::vector<std::size_t> eta_rows(const std::vector<double>& ys, double eps_prime) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ys.size(); ++i)
    if (std::abs(ys[i]) < 1.0 - eps_prime) rows.push_back(i);
  if (rows.empty()) {
    double best = 2.0;
    for (double y : ys) best = std::min(best, std::abs(y));
    for (std::size_t i = 0; i < ys.size(); ++i)
      if (std::abs(ys[i]) == best) rows.push_back(i);
  }
  return rows;
}

/// Smallest grid eta' with mass <= 3 exp(-eta'^{-2+eps'}) on every row of
/// I_eps', from a normalized separation matrix over the midpoint grid ys.
inline double eta_from_matrix(const std::vector<std::vector<double>>& d, const std::vector<double>& ys,
                              double eps_prime, std::size_t eta_grid) {
  if (!(eps_prime > 0.0 && eps_prime < 2.0)) throw DomainError("eta needs 0 < eps' < 2");
  const auto rows = eta_rows(ys, eps_prime);
  double best = 1.0;
  for (double e : eta_candidates(eta_grid)) {
    const double bound = 3.0 * std::exp(-std::pow(e, -2.0 + eps_prime));
    bool ok = true;
    for (std::size_t i : rows)
      if (row_mass(d[i], e) > bound) {
        ok = false;
        break;
      }
    if (ok) best = std::min(best, e);
  }
  return best;
}

inline double eta_of(const MapExpr& h, double eps_prime, std::size_t y_grid, std::size_t eta_grid, std::size_t m) {
  if (!(eps_prime > 0.0 && eps_prime < 2.0)) throw DomainError("eta needs 0 < eps' < 2");
  const auto ys = midpoint_grid(-1.0, 1.0, y_grid);
  return eta_from_matrix(normalized_separation(h, ys, m), ys, eps_prime, eta_grid);
}

/// sup over starting points w and k <= q of the coupling bound
/// (1/k) sum_{j<=k} dist(f^j x, fhat^j x) >= d_K(e^f_k(x), e^fhat_k(x)),
/// where x = hh(w), f = hh R_alpha hh^-1 and fhat = hh R_ahat hh^-1.
/// Exact over all k when q <= exact_terms; beyond that, k runs over a
/// geometric set and each average uses stratified j.
inline double orbit_coupling_sup(const MapExpr& hh, const Rational& alpha, const Rational& ahat,
                                 const std::vector<AnnulusPoint>& ws, std::size_t exact_terms, std::uint64_t seed) {
  const std::int64_t p = to_int64(alpha.num());
  const std::int64_t q = to_int64(alpha.den());
  const double shift = (ahat - alpha).to_double();
  const SurfaceKind kind = hh.kind();
  auto term = [&](const AnnulusPoint& w, std::int64_t j) {
    double base = frac_multiple(p, q, j);
    double jd = static_cast<double>(j) * shift;
    AnnulusPoint a(w.theta + base, w.y);
    AnnulusPoint b(w.theta + base + (jd - std::floor(jd)), w.y);
    return dist(project_pi(apply_chart(hh, a), kind), project_pi(apply_chart(hh, b), kind));
  };
  std::vector<double> sup(ws.size(), 0.0);
  parallel_for(ws.size(), [&](std::size_t i) {
    std::mt19937_64 rng(detail::splitmix(seed + i));
    const auto exact = static_cast<std::int64_t>(std::min<std::size_t>(exact_terms, static_cast<std::size_t>(q)));
    double sum = 0.0;
    for (std::int64_t j = 1; j <= exact; ++j) {
      sum += term(ws[i], j);
      sup[i] = std::max(sup[i], sum / static_cast<double>(j));
    }
    if (q <= exact) return;
    const int levels = 32;
    const int strata = 256;
    for (int l = 1; l <= levels; ++l) {
      double frac = static_cast<double>(l) / levels;
      auto k = static_cast<std::int64_t>(std::round(std::exp(std::log(static_cast<double>(exact)) * (1.0 - frac) +
                                                              std::log(static_cast<double>(q)) * frac)));
      k = std::clamp<std::int64_t>(k, exact + 1, q);
      double acc = 0.0;
      for (int s = 0; s < strata; ++s) {
        double u = (s + uniform01(rng)) / strata;
        auto j = std::clamp<std::int64_t>(1 + static_cast<std::int64_t>(u * static_cast<double>(k)), 1, k);
        acc += term(ws[i], j);
      }
      sup[i] = std::max(sup[i], acc / strata);
    }
  });
  double out = 0.0;
  for (double v : sup) out = std::max(out, v);
  return out;
}

inline LedgerEntry make_entry(int stage, std::string id, double measured, double bound, bool pass, double seconds) {
  return LedgerEntry{stage, std::move(id), measured, bound, pass, seconds};
}

inline SchemeState initial_state(const EngineParams& p) {
  SchemeState s;
  s.n = 0;
  s.mode = p.mode;
  s.h = MapExpr::identity(p.kind);
  s.alpha = Rational(0);
  if (p.mode == SchemeMode::Ergodic) {
    s.eps = 0.5;
  } else {
    s.eps = 0.25;
    s.eps_prev = 1.0;
    s.eta = eta_of(s.h, s.eps_prev, p.y_grid, p.eta_grid, p.support);
    s.delta = std::exp(-std::pow(s.eta, -2.0 + s.eps_prev));
  }
  return s;
}

/// One stage of the ergodic scheme from state s (eps_n = 1/2^{n+1}).
inline SchemeState ergodic_step(const SchemeState& s, const EngineParams& p, Rational* nu_used = nullptr) {
  if (s.mode != SchemeMode::Ergodic) throw DomainError("ergodic_step needs an ergodic state");
  const SurfaceKind kind = p.kind;
  const int stage = s.n + 1;
  const double eps_raw = detail::raw_distance(kind, s.eps);
  const std::int64_t q = to_int64(s.alpha.den());
  const MapExpr f = s.f();
  detail::Stopwatch sw;

  SchemeState out;
  out.n = stage;
  out.mode = SchemeMode::Ergodic;
  out.eps = s.eps / 2.0;
  out.eps_prev = s.eps;
  out.bilipschitz = bilipschitz_estimate(s.h, p.q_samples, detail::stage_seed(p.seed, stage, 1));
  double eta_small = std::min(0.5, eps_raw / (16.0 * out.bilipschitz)) * (1.0 - 1e-9);

  // Samples for conditions (1) and (2).
  std::mt19937_64 rng(detail::stage_seed(p.seed, stage, 2));
  std::vector<AnnulusPoint> zs(p.orbit_samples);
  for (auto& z : zs) z = sample_annulus_region(rng, s.eps / 2.0);
  std::vector<AnnulusPoint> xs(p.orbit_samples);
  for (auto& x : xs) x = sample_annulus_region(rng, 0.0);
  const LebesgueGrid grid = LebesgueGrid::square(kind, p.leb_grid);

  std::string failed = "none";
  for (int attempt = 0; attempt <= p.resolution_retries; ++attempt, eta_small /= 2.0) {
    ErgodicKickerOptions ko;
    ko.box_cap = p.kicker_box_cap;
    ko.y_grid = p.kicker_y_grid;
    ko.check_k_theta = p.kicker_check_k_theta;
    ko.check_k_y = p.kicker_check_k_y;
    ErgodicKicker kick;
    try {
      kick = build_ergodic_kicker(q, eta_small, kind, ko);
    } catch (const ResolutionExceeded&) {
      out.ledger.push_back(make_entry(stage, "erg.kicker", eta_small, 0.0, false, sw.lap()));
      throw StageFailed("erg.kicker", {out});
    }
    const MapExpr hh = MapExpr::compose(s.h, kick.map);
    const double kick_secs = sw.lap();
    if (p.log)
      p.log("stage " + std::to_string(stage) + " kicker q=" + std::to_string(q) + " eta=" + std::to_string(eta_small) +
            " rows=" + std::to_string(kick.rows) + " cols=" + std::to_string(kick.cols_per_domain));

    // q-independent part of condition (1): hh_* of the circle through z.
    std::vector<double> base(zs.size()), pieces(zs.size());
    parallel_for(zs.size(), [&](std::size_t i) {
      base[i] = pushforward_to_lebesgue(hh, circle_measure(zs[i].y, kind), grid, {}, &pieces[i]).value;
    });
    std::vector<AnnulusPoint> ws(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ws[i] = apply_chart(hh, xs[i], true);
    const double base_secs = sw.lap();

    Rational nu(BigInt(1), BigInt(1) << (s.n + 3));
    double c1 = 0, c2 = 0, c3 = 0;
    auto trace = [&] {
      if (p.log)
        p.log("stage " + std::to_string(stage) + " nu=" + nu.str() + " " + failed + " c1=" + std::to_string(c1) +
              " c2=" + std::to_string(c2) + " c3=" + std::to_string(c3));
    };
    for (int halving = 0; halving <= p.max_halvings; ++halving, nu = nu / Rational(2)) {
      const Rational ahat = choose_next_alpha(s.alpha, nu, BigInt(q) + 1);
      const MapExpr fhat = MapExpr::conjugate(hh, MapExpr::rotation(kind, ahat));
      c3 = c0_distance(fhat, f, 0.0, p.c0_samples, detail::stage_seed(p.seed, stage, 3));
      if (!(c3 < eps_raw / 2.0)) {
        failed = "erg.3.c0";
        trace();
        continue;
      }
      c2 = orbit_coupling_sup(hh, s.alpha, ahat, ws, p.exact_orbit_terms, detail::stage_seed(p.seed, stage, 4));
      if (!(c2 < eps_raw / 2.0)) {
        failed = "erg.2.orbit_coupling";
        trace();
        continue;
      }
      const double qhat = ahat.den().convert_to<double>();
      c1 = 0.0;
      for (std::size_t i = 0; i < zs.size(); ++i)
        c1 = std::max(c1, base[i] + lattice_replacement_error(kind, pieces[i], qhat));
      if (!(c1 <= eps_raw / 2.0 + grid.radius())) {
        failed = "erg.1.equidistribution";
        trace();
        continue;
      }
      const double secs = sw.lap();
      out.h = hh;
      out.alpha = ahat;
      out.kicker_rows = kick.rows;
      out.ledger.push_back(make_entry(stage, "erg.kicker", kick.certificate.max_value,
                                      eta_small + kick.certificate.radius, kick.certificate.holds(), kick_secs));
      out.ledger.push_back(make_entry(stage, "erg.1.equidistribution", c1, eps_raw / 2.0 + grid.radius(), true,
                                      base_secs + secs));
      out.ledger.push_back(make_entry(stage, "erg.2.orbit_coupling", c2, eps_raw / 2.0, true, 0.0));
      out.ledger.push_back(make_entry(stage, "erg.3.c0", c3, eps_raw / 2.0, true, 0.0));
      out.ledger.push_back(make_entry(stage, "erg.4.denominator", ahat.den().convert_to<double>(),
                                      static_cast<double>(q), ahat.den() > BigInt(q), 0.0));
      if (nu_used) *nu_used = nu;
      return out;
    }
    if (p.continue_on_failure && attempt == p.resolution_retries) {
      const Rational ahat = choose_next_alpha(s.alpha, nu, BigInt(q) + 1);
      out.h = hh;
      out.alpha = ahat;
      out.kicker_rows = kick.rows;
      out.ledger.push_back(make_entry(stage, failed, failed == "erg.3.c0" ? c3 : failed == "erg.2.orbit_coupling" ? c2 : c1,
                                      eps_raw / 2.0, false, sw.lap()));
      if (nu_used) *nu_used = nu;
      return out;
    }
  }
  out.ledger.push_back(make_entry(stage, failed, 0.0, eps_raw / 2.0, false, sw.lap()));
  throw StageFailed(failed, {out});
}

/// One stage of the emergence scheme from state s (eps_n = 1/(4 q_n)).
inline SchemeState emergence_step(const SchemeState& s, const EngineParams& p, Rational* nu_used = nullptr) {
  if (s.mode != SchemeMode::Emergence) throw DomainError("emergence_step needs an emergence state");
  const SurfaceKind kind = p.kind;
  const int stage = s.n + 1;
  const std::int64_t q = to_int64(s.alpha.den());
  const double eps = s.eps;
  const MapExpr f = s.f();
  detail::Stopwatch sw;

  SchemeState out;
  out.n = stage;
  out.mode = SchemeMode::Emergence;
  out.eps_prev = eps;

  const auto ys = midpoint_grid(-1.0, 1.0, p.y_grid);
  const auto d_h = normalized_separation(s.h, ys, p.support);
  const double eta_h1 = eta_from_matrix(d_h, ys, 1.0, p.eta_grid);
  out.bilipschitz = bilipschitz_estimate(s.h, p.q_samples, detail::stage_seed(p.seed, stage, 1));
  const double delta_h1 = std::exp(-std::pow(eta_h1, -2.0 + eps));
  double eps_prime = eps * eta_h1 / (2.0 * out.bilipschitz);
  const double prep_secs = sw.lap();

  std::vector<LedgerEntry> failures;
  for (int attempt = 0; attempt <= p.resolution_retries; ++attempt, eps_prime /= 2.0) {
    failures.clear();
    const double eps_prime_raw = std::min(0.99, detail::raw_distance(kind, eps_prime));
    EmergenceKickerOptions ko;
    ko.box_cap = p.kicker_box_cap;
    ko.y_grid = p.separation_y_grid;
    ko.atoms = p.separation_support;
    EmergenceKicker g;
    try {
      g = build_emergence_kicker(q, eps_prime_raw, eps_prime_raw / 4.0, p.colors, kind, ko);
    } catch (const ResolutionExceeded&) {
      out.ledger.push_back(make_entry(stage, "emer.kicker", eps_prime_raw, 0.0, false, sw.lap()));
      throw StageFailed("emer.kicker", {out});
    } catch (const InfeasibleSeparation&) {
      out.ledger.push_back(make_entry(stage, "emer.kicker", eps_prime_raw, 0.0, false, sw.lap()));
      throw StageFailed("emer.kicker", {out});
    }
    const MapExpr hh = MapExpr::compose(s.h, g.map);
    const double kick_secs = sw.lap();

    // (i) 2 eta(hh, eps) <= eta(h, 1), both on the same grid.
    const auto d_hh = normalized_separation(hh, ys, p.support);
    const double eta_hat = eta_from_matrix(d_hh, ys, eps, p.eta_grid);
    const bool ok_i = 2.0 * eta_hat <= eta_h1;
    const double secs_i = sw.lap();

    // (ii) hh, hh^-1 within eps eta(h,1) of h, h^-1 on M_{eps delta}.
    const double c0_bound = detail::raw_distance(kind, eps * eta_h1);
    const double region = eps * delta_h1;
    const double c0_fwd = c0_distance(hh, s.h, region, p.c0_samples, detail::stage_seed(p.seed, stage, 5));
    const double c0_inv = c0_distance(MapExpr::inverse(hh), MapExpr::inverse(s.h), region, p.c0_samples,
                                      detail::stage_seed(p.seed, stage, 6));
    // eps_n eta_n on M_{eps_n delta_n}.
    const double hn_bound = detail::raw_distance(kind, eps * s.eta);
    const double hn = c0_distance(hh, s.h, eps * s.delta, p.c0_samples, detail::stage_seed(p.seed, stage, 7));
    const double secs_ii = sw.lap();

    // alpha-hat: |ahat - alpha| < nu, denominator > 4q, C1 closeness.
    const double c1_bound = detail::raw_distance(kind, eps);
    Rational nu = Rational(BigInt(1), BigInt(16) * q);
    Rational ahat;
    double c1 = 0.0;
    bool ok_c1 = false;
    for (int halving = 0; halving <= p.max_halvings; ++halving, nu = nu / Rational(2)) {
      ahat = choose_next_alpha(s.alpha, nu, BigInt(4) * q + 1);
      c1 = c1_distance(MapExpr::conjugate(hh, MapExpr::rotation(kind, ahat)), f, 0.0, p.c0_samples,
                       default_fd_step(kind), detail::stage_seed(p.seed, stage, 8));
      if (c1 <= c1_bound) {
        ok_c1 = true;
        break;
      }
    }
    const double secs_nu = sw.lap();

    out.h = hh;
    out.alpha = ahat;
    out.kicker_rows = g.block_rows;
    out.eps = 1.0 / (4.0 * ahat.den().convert_to<double>());
    out.eta = eta_hat;
    out.delta = std::exp(-std::pow(out.eta, -2.0 + eps));
    out.ledger = {
        make_entry(stage, "emer.kicker.displacement", g.displacement_bound, eps_prime_raw,
                   g.displacement_bound <= eps_prime_raw, kick_secs + prep_secs),
        make_entry(stage, "emer.i.eta_halving", 2.0 * eta_hat, eta_h1, ok_i, secs_i),
        make_entry(stage, "emer.ii.c0_h", c0_fwd, c0_bound, c0_fwd <= c0_bound, secs_ii),
        make_entry(stage, "emer.ii.c0_hinv", c0_inv, c0_bound, c0_inv <= c0_bound, 0.0),
        make_entry(stage, "emer.hn.c0", hn, hn_bound, hn <= hn_bound, 0.0),
        make_entry(stage, "emer.nu.c1", c1, c1_bound, ok_c1, secs_nu),
        make_entry(stage, "emer.nu.denominator", ahat.den().convert_to<double>(), 4.0 * static_cast<double>(q),
                   ahat.den() > BigInt(4) * q, 0.0),
        make_entry(stage, "emer.eta_sequence", out.eta, s.eta / 2.0, out.eta <= s.eta / 2.0, 0.0),
        make_entry(stage, "emer.eps_quarter", out.eps, eps / 4.0, out.eps <= eps / 4.0, 0.0),
        make_entry(stage, "emer.delta_sequence", out.delta, s.delta, out.delta <= s.delta, 0.0),
    };
    if (nu_used) *nu_used = nu;
    if (out.passed() || (p.continue_on_failure && attempt == p.resolution_retries)) return out;
    if (!ok_c1 && ok_i) break;  // a finer kicker cannot help the alpha search
  }
  std::string failed = "emer";
  for (const auto& e : out.ledger)
    if (!e.pass) {
      failed = e.id;
      break;
    }
  throw StageFailed(failed, {out});
}

struct SchemeRun {
  std::vector<SchemeState> states;
  MapExpr f;
  IntervalLedger intervals;
  std::vector<LedgerEntry> cauchy;
  double tail_bound = 0.0;  // sum of eps_m over m > N, bounding d(f_N, f)
  bool passed() const {
    for (const auto& s : states)
      if (!s.passed()) return false;
    for (const auto& e : cauchy)
      if (!e.pass) return false;
    return true;
  }
  std::vector<LedgerEntry> ledger() const {
    std::vector<LedgerEntry> all;
    for (const auto& s : states) all.insert(all.end(), s.ledger.begin(), s.ledger.end());
    all.insert(all.end(), cauchy.begin(), cauchy.end());
    return all;
  }
};

/// N stages from (h_0 = id, alpha_0 = 0).
inline SchemeRun run_scheme(const EngineParams& p) {
  SchemeRun run;
  run.states.push_back(initial_state(p));
  run.f = run.states.back().f();
  for (int n = 0; n < p.stages; ++n) {
    const SchemeState& cur = run.states.back();
    Rational nu;
    SchemeState next;
    try {
      next = p.mode == SchemeMode::Ergodic ? ergodic_step(cur, p, &nu) : emergence_step(cur, p, &nu);
    } catch (StageFailed& e) {
      std::vector<SchemeState> all = run.states;
      all.insert(all.end(), e.states.begin(), e.states.end());
      throw StageFailed(e.condition, std::move(all));
    }
    run.states.back().nu = nu;
    const SchemeState& prev = run.states.back();
    const MapExpr f_prev = prev.f();
    const MapExpr f_next = next.f();
    const SurfaceKind kind = p.kind;
    if (p.mode == SchemeMode::Ergodic) {
      double bound = detail::raw_distance(kind, next.eps);
      // Same sample set as condition (3) of the stage.
      double d = c0_distance(f_next, f_prev, 0.0, p.c0_samples, detail::stage_seed(p.seed, next.n, 3));
      run.cauchy.push_back(make_entry(next.n, "cauchy.c0", d, bound, d <= bound, 0.0));
    } else {
      double bound = detail::raw_distance(kind, prev.eps);
      double d = c1_distance(f_next, f_prev, 0.0, p.c0_samples, default_fd_step(kind),
                             detail::stage_seed(p.seed, next.n, 9));
      run.cauchy.push_back(make_entry(next.n, "cauchy.c1", d, bound, d <= bound, 0.0));
      run.intervals.intervals.push_back({prev.alpha - Rational(2) * nu, prev.alpha + Rational(2) * nu});
      if (run.intervals.intervals.size() >= 2) {
        bool nested = run.intervals.nested();
        next.ledger.push_back(make_entry(next.n, "emer.interval_nested", nested ? 1.0 : 0.0, 1.0, nested, 0.0));
      }
    }
    run.states.push_back(std::move(next));
    run.f = f_next;
    if (!run.states.back().passed() && !p.continue_on_failure) {
      std::string failed;
      for (const auto& e : run.states.back().ledger)
        if (!e.pass && failed.empty()) failed = e.id;
      throw StageFailed(failed, run.states);
    }
  }
  const double last_eps = run.states.back().eps;
  run.tail_bound = p.mode == SchemeMode::Ergodic ? last_eps : last_eps / 3.0;
  return run;
}

}  // namespace abclab
